#include "crmopo/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace crmopo {

using nlohmann::json;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CmdpLoadError("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << text;
}

std::string csv_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

const json& field(const json& j, const char* name, const std::string& origin) {
    auto it = j.find(name);
    if (it == j.end())
        throw CmdpLoadError(origin + ": missing field '" + name + "'");
    return *it;
}

}  // namespace

std::string cmdp_to_json(const TabularCmdp& model) {
    json j;
    j["format"] = "cmdp/1";
    j["n_states"] = model.n_states;
    j["n_actions"] = model.n_actions;
    j["m"] = model.n_objectives;
    j["p"] = model.n_constraints;
    j["gamma"] = model.discount;
    j["r_max"] = model.r_max;
    j["rho"] = std::vector<double>(model.initial.data(), model.initial.data() + model.initial.size());
    j["limits"] = std::vector<double>(model.limits.data(), model.limits.data() + model.limits.size());

    // transition[s][a][s']
    json transition = json::array();
    for (int s = 0; s < model.n_states; ++s) {
        json per_action = json::array();
        for (int a = 0; a < model.n_actions; ++a) {
            json row = json::array();
            for (int t = 0; t < model.n_states; ++t) row.push_back(model.transition[a](s, t));
            per_action.push_back(std::move(row));
        }
        transition.push_back(std::move(per_action));
    }
    j["transition"] = std::move(transition);

    // rewards[i][s][a]
    json rewards = json::array();
    for (int i = 0; i < model.n_channels(); ++i) {
        json table = json::array();
        for (int s = 0; s < model.n_states; ++s) {
            json row = json::array();
            for (int a = 0; a < model.n_actions; ++a) row.push_back(model.rewards[i](s, a));
            table.push_back(std::move(row));
        }
        rewards.push_back(std::move(table));
    }
    j["rewards"] = std::move(rewards);
    return j.dump(2) + "\n";
}

TabularCmdp cmdp_from_json(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw CmdpLoadError(origin + ": parse error at byte " + std::to_string(e.byte) + ": " +
                            e.what());
    }

    TabularCmdp model;
    try {
        std::string format = field(j, "format", origin).get<std::string>();
        if (format != "cmdp/1")
            throw CmdpLoadError(origin + ": unsupported format '" + format + "'");
        model.n_states = field(j, "n_states", origin).get<int>();
        model.n_actions = field(j, "n_actions", origin).get<int>();
        model.n_objectives = field(j, "m", origin).get<int>();
        model.n_constraints = field(j, "p", origin).get<int>();
        model.discount = field(j, "gamma", origin).get<double>();
        model.r_max = field(j, "r_max", origin).get<double>();

        if (model.n_states < 1 || model.n_actions < 1)
            throw CmdpLoadError(origin + ": n_states and n_actions must be positive");

        auto rho = field(j, "rho", origin).get<std::vector<double>>();
        model.initial = Eigen::Map<const Vector>(rho.data(), rho.size());
        auto limits = field(j, "limits", origin).get<std::vector<double>>();
        model.limits = Eigen::Map<const Vector>(limits.data(), limits.size());

        const json& transition = field(j, "transition", origin);
        if (static_cast<int>(transition.size()) != model.n_states)
            throw CmdpLoadError(origin + ": transition must have n_states outer entries");
        model.transition.assign(model.n_actions, Matrix::Zero(model.n_states, model.n_states));
        for (int s = 0; s < model.n_states; ++s) {
            const json& per_action = transition.at(s);
            if (static_cast<int>(per_action.size()) != model.n_actions)
                throw CmdpLoadError(origin + ": transition[" + std::to_string(s) +
                                    "] must have n_actions entries");
            for (int a = 0; a < model.n_actions; ++a) {
                const json& row = per_action.at(a);
                if (static_cast<int>(row.size()) != model.n_states)
                    throw CmdpLoadError(origin + ": transition[" + std::to_string(s) + "][" +
                                        std::to_string(a) + "] must have n_states entries");
                for (int t = 0; t < model.n_states; ++t)
                    model.transition[a](s, t) = row.at(t).get<double>();
            }
        }

        const json& rewards = field(j, "rewards", origin);
        if (static_cast<int>(rewards.size()) != model.n_channels())
            throw CmdpLoadError(origin + ": rewards must have m+p channels");
        model.rewards.assign(model.n_channels(), Matrix::Zero(model.n_states, model.n_actions));
        for (int i = 0; i < model.n_channels(); ++i) {
            const json& table = rewards.at(i);
            if (static_cast<int>(table.size()) != model.n_states)
                throw CmdpLoadError(origin + ": rewards[" + std::to_string(i) +
                                    "] must have n_states rows");
            for (int s = 0; s < model.n_states; ++s) {
                const json& row = table.at(s);
                if (static_cast<int>(row.size()) != model.n_actions)
                    throw CmdpLoadError(origin + ": rewards[" + std::to_string(i) + "][" +
                                        std::to_string(s) + "] must have n_actions entries");
                for (int a = 0; a < model.n_actions; ++a)
                    model.rewards[i](s, a) = row.at(a).get<double>();
            }
        }
    } catch (const json::exception& e) {
        throw CmdpLoadError(origin + ": schema error: " + e.what());
    }

    std::vector<std::string> report = validate_cmdp(model);
    if (!report.empty()) {
        std::string msg = origin + ": validation failed:";
        for (const std::string& line : report) msg += "\n  " + line;
        throw CmdpLoadError(msg);
    }
    return model;
}

TabularCmdp load_cmdp(const std::string& path) { return cmdp_from_json(read_file(path), path); }

void save_cmdp(const TabularCmdp& model, const std::string& path) {
    write_file(path, cmdp_to_json(model));
}

void write_trace_csv(const RunTrace& trace, int n_objectives, int n_constraints,
                     const std::string& path) {
    const bool log_exact = trace.config.log_exact;
    const int n_lambda = static_cast<int>(trace.config.ca_npg.preferences.size());

    std::ostringstream out;
    out << "t,branch,in_n0";
    for (int k = 0; k < n_constraints; ++k) out << ",J_" << (n_objectives + k + 1);
    if (log_exact) {
        for (int i = 0; i < n_objectives + n_constraints; ++i) out << ",f_" << (i + 1);
        out << ",weighted_f";
    }
    out << ",d_norm";
    for (int i = 0; i < n_lambda; ++i) out << ",lambda_" << (i + 1);
    out << "\n";

    for (const IterationRecord& rec : trace.iterations) {
        out << rec.t << ',';
        if (rec.rectified_channel < 0)
            out << "improve";
        else
            out << "rectify:" << (rec.rectified_channel + 1);
        out << ',' << (rec.in_n0 ? 1 : 0);
        for (int k = 0; k < n_constraints; ++k)
            out << ',' << csv_double(rec.estimates(n_objectives + k));
        if (log_exact) {
            for (int i = 0; i < n_objectives + n_constraints; ++i)
                out << ',' << csv_double(rec.exact_returns(i));
            out << ',' << csv_double(rec.weighted_return);
        }
        out << ',' << csv_double(rec.direction_norm);
        for (int i = 0; i < n_lambda; ++i) {
            out << ',';
            if (rec.lambda_hat.size() > 0) out << csv_double(rec.lambda_hat(i));
        }
        out << "\n";
    }
    write_file(path, out.str());
}

void write_frontier_csv(const std::vector<FrontierPoint>& frontier, const std::string& path) {
    std::ostringstream out;
    if (!frontier.empty()) {
        const FrontierPoint& first = frontier.front();
        for (int i = 0; i < first.objectives.size(); ++i) out << (i ? "," : "") << "f_" << (i + 1);
        for (int k = 0; k < first.constraints.size(); ++k)
            out << ",f_" << (first.objectives.size() + k + 1);
        for (int s = 0; s < first.policy.rows(); ++s)
            for (int a = 0; a < first.policy.cols(); ++a) out << ",pi_" << s << "_" << a;
        out << "\n";
    }
    for (const FrontierPoint& point : frontier) {
        for (int i = 0; i < point.objectives.size(); ++i)
            out << (i ? "," : "") << csv_double(point.objectives(i));
        for (int k = 0; k < point.constraints.size(); ++k)
            out << ',' << csv_double(point.constraints(k));
        for (int s = 0; s < point.policy.rows(); ++s)
            for (int a = 0; a < point.policy.cols(); ++a)
                out << ',' << csv_double(point.policy(s, a));
        out << "\n";
    }
    write_file(path, out.str());
}

}  // namespace crmopo
