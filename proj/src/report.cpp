#include "ehsim/report.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ehsim {

namespace {

using ordered_json = nlohmann::ordered_json;

// Rewards and totals are integer-valued by construction; print them without
// a decimal point so the CSVs diff cleanly.
std::string fmt_num(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) {
        return std::to_string(static_cast<long long>(v));
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("failed writing " + path);
}

}  // namespace

std::string report_to_json(const ExperimentReport& report) {
    ordered_json j;
    j["format"] = "report-v1";
    j["experiment"] = report.experiment;
    j["seed"] = report.seed;
    j["days"] = report.days;
    ordered_json notes = ordered_json::object();
    for (const auto& [key, value] : report.notes) notes[key] = value;
    j["notes"] = std::move(notes);

    ordered_json nodes = ordered_json::array();
    for (const NodeSummary& n : report.nodes) {
        nodes.push_back({{"node_id", n.node_id},
                         {"arm", n.arm},
                         {"trainings_performed", n.trainings_performed},
                         {"negative_reward_days", n.negative_reward_days},
                         {"total_reward", n.total_reward},
                         {"total_samples", n.total_samples},
                         {"depletion_days", n.depletion_days}});
    }
    j["nodes"] = std::move(nodes);

    ordered_json days = ordered_json::array();
    for (const DayRecord& r : report.per_day) {
        days.push_back({{"day", r.day},
                        {"node_id", r.node_id},
                        {"arm", r.arm},
                        {"reward", r.reward},
                        {"depleted", r.depleted},
                        {"samples_sent", r.samples_sent},
                        {"trainings", r.trainings}});
    }
    j["per_day"] = std::move(days);
    return j.dump(2) + "\n";
}

ExperimentReport report_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw std::runtime_error(std::string("bad report JSON: ") + e.what());
    }
    if (j.value("format", "") != "report-v1") throw std::runtime_error("not a report-v1 document");

    ExperimentReport report;
    report.experiment = j.at("experiment").get<std::string>();
    report.seed = j.at("seed").get<std::uint64_t>();
    report.days = j.at("days").get<int>();
    for (const auto& [key, value] : j.at("notes").items()) {
        report.notes.emplace_back(key, value.get<std::string>());
    }
    for (const auto& n : j.at("nodes")) {
        NodeSummary s;
        s.node_id = n.at("node_id").get<std::string>();
        s.arm = n.at("arm").get<std::string>();
        s.trainings_performed = n.at("trainings_performed").get<long>();
        s.negative_reward_days = n.at("negative_reward_days").get<int>();
        s.total_reward = n.at("total_reward").get<double>();
        s.total_samples = n.at("total_samples").get<long>();
        s.depletion_days = n.at("depletion_days").get<int>();
        report.nodes.push_back(std::move(s));
    }
    for (const auto& d : j.at("per_day")) {
        DayRecord r;
        r.day = d.at("day").get<int>();
        r.node_id = d.at("node_id").get<std::string>();
        r.arm = d.at("arm").get<std::string>();
        r.reward = d.at("reward").get<double>();
        r.depleted = d.at("depleted").get<bool>();
        r.samples_sent = d.at("samples_sent").get<long>();
        r.trainings = d.at("trainings").get<int>();
        report.per_day.push_back(std::move(r));
    }
    return report;
}

void write_report_files(const ExperimentReport& report, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "plots");

    write_text((fs::path(dir) / "report.json").string(), report_to_json(report));

    std::ostringstream per_day;
    per_day << "day,node_id,arm,reward,depleted,samples_sent\n";
    for (const DayRecord& r : report.per_day) {
        per_day << r.day << ',' << r.node_id << ',' << r.arm << ',' << fmt_num(r.reward) << ','
                << (r.depleted ? 1 : 0) << ',' << r.samples_sent << '\n';
    }
    write_text((fs::path(dir) / "per_day.csv").string(), per_day.str());

    std::ostringstream rewards;
    rewards << "day,node_id,arm,reward\n";
    for (const DayRecord& r : report.per_day) {
        rewards << r.day << ',' << r.node_id << ',' << r.arm << ',' << fmt_num(r.reward) << '\n';
    }
    write_text((fs::path(dir) / "plots" / "day_reward.csv").string(), rewards.str());

    std::ostringstream trainings;
    trainings << "day,node_id,arm,trainings\n";
    for (const DayRecord& r : report.per_day) {
        trainings << r.day << ',' << r.node_id << ',' << r.arm << ',' << r.trainings << '\n';
    }
    write_text((fs::path(dir) / "plots" / "training_events.csv").string(), trainings.str());

    std::ostringstream totals;
    totals << "node_id,arm,total_reward,negative_reward_days,depletion_days,total_samples,trainings\n";
    for (const NodeSummary& n : report.nodes) {
        totals << n.node_id << ',' << n.arm << ',' << fmt_num(n.total_reward) << ','
               << n.negative_reward_days << ',' << n.depletion_days << ',' << n.total_samples << ','
               << n.trainings_performed << '\n';
    }
    write_text((fs::path(dir) / "plots" / "arm_totals.csv").string(), totals.str());
}

std::string summarize_report(const ExperimentReport& report) {
    std::ostringstream out;
    out << "experiment: " << report.experiment << "  seed: " << report.seed
        << "  days: " << report.days << "\n";
    for (const auto& [key, value] : report.notes) out << "  " << key << " = " << value << "\n";
    out << "node                              arm       trainings  neg-days  depleted  reward      samples\n";
    for (const NodeSummary& n : report.nodes) {
        char line[160];
        std::snprintf(line, sizeof line, "%-33s %-9s %9ld %9d %9d  %-11s %ld\n", n.node_id.c_str(),
                      n.arm.c_str(), n.trainings_performed, n.negative_reward_days, n.depletion_days,
                      fmt_num(n.total_reward).c_str(), n.total_samples);
        out << line;
    }
    return out.str();
}

}  // namespace ehsim
