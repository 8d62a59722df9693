#pragma once

#include <vector>

namespace ehsim {

// Explicit finite MDP used as a reference model in tests: everything is
// enumerated, nothing is learned.
struct MdpTransition {
    double probability = 1.0;
    int next_state = 0;
    double reward = 0;
};

struct ExplicitMdp {
    int num_states = 0;
    int num_actions = 0;
    // transitions[s * num_actions + a] -> outcome distribution
    std::vector<std::vector<MdpTransition>> transitions;

    const std::vector<MdpTransition>& at(int s, int a) const {
        return transitions[static_cast<std::size_t>(s) * static_cast<std::size_t>(num_actions) +
                           static_cast<std::size_t>(a)];
    }
};

// Bellman-optimality fixed point by synchronous sweeps, iterated until the
// sup-norm change drops below `tolerance`. Returns Q flattened as
// q[s * num_actions + a].
std::vector<double> value_iteration(const ExplicitMdp& mdp, double gamma, double tolerance = 1e-10,
                                    long max_sweeps = 1000000);

}  // namespace ehsim
