#include "ehsim/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ehsim {

std::vector<double> value_iteration(const ExplicitMdp& mdp, double gamma, double tolerance,
                                    long max_sweeps) {
    if (mdp.num_states <= 0 || mdp.num_actions <= 0 ||
        mdp.transitions.size() !=
            static_cast<std::size_t>(mdp.num_states) * static_cast<std::size_t>(mdp.num_actions)) {
        throw std::invalid_argument("malformed MDP");
    }
    if (!(gamma >= 0 && gamma < 1)) throw std::invalid_argument("gamma must be in [0, 1)");

    const std::size_t n = mdp.transitions.size();
    std::vector<double> q(n, 0.0), next(n, 0.0);
    std::vector<double> v(static_cast<std::size_t>(mdp.num_states), 0.0);

    for (long sweep = 0; sweep < max_sweeps; ++sweep) {
        for (int s = 0; s < mdp.num_states; ++s) {
            double best = q[static_cast<std::size_t>(s) * mdp.num_actions];
            for (int a = 1; a < mdp.num_actions; ++a) {
                best = std::max(best, q[static_cast<std::size_t>(s) * mdp.num_actions + a]);
            }
            v[static_cast<std::size_t>(s)] = best;
        }
        double delta = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double sum = 0;
            for (const MdpTransition& t : mdp.transitions[i]) {
                sum += t.probability * (t.reward + gamma * v[static_cast<std::size_t>(t.next_state)]);
            }
            next[i] = sum;
            delta = std::max(delta, std::abs(next[i] - q[i]));
        }
        q.swap(next);
        if (delta < tolerance) return q;
    }
    throw std::runtime_error("value iteration did not converge");
}

}  // namespace ehsim
