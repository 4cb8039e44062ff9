#include "solsel/perf_data.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "solsel/error.hpp"

namespace solsel {

using nlohmann::json;

namespace {

constexpr int kSchemaVersion = 1;

json record_to_json(const PerformanceRecord& r) {
    return json{
        {"group_id", r.group_id},
        {"numeric_values", r.numeric_values},
        {"context", r.context},
        {"t_sol", r.t_sol ? json(*r.t_sol) : json(nullptr)},
        {"success", r.success},
        {"reward", r.reward},
        {"step_index", r.step_index},
        {"source", r.source == RecordSource::Online ? "online" : "imported"},
    };
}

PerformanceRecord record_from_json(const json& j) {
    PerformanceRecord r;
    r.group_id = j.at("group_id").get<int>();
    r.numeric_values = j.at("numeric_values").get<std::vector<double>>();
    r.context = j.at("context").get<std::vector<double>>();
    if (!j.at("t_sol").is_null()) r.t_sol = j.at("t_sol").get<double>();
    r.success = j.at("success").get<bool>();
    r.reward = j.at("reward").get<double>();
    r.step_index = j.at("step_index").get<long>();
    r.source = RecordSource::Imported;
    if (r.success && !(r.t_sol && *r.t_sol > 0.0)) {
        throw DataError("successful record without a positive t_sol");
    }
    return r;
}

}  // namespace

double compute_reward(std::optional<double> t_sol, bool success, RunningMax& running_max) {
    if (!success) return running_max.penalty();
    if (!t_sol || !(*t_sol > 0.0)) {
        throw DomainError("successful solve must report t_sol > 0");
    }
    running_max.update(*t_sol);
    return -std::log(*t_sol);
}

void Dataset::append(PerformanceRecord record) {
    by_group_[record.group_id].push_back(records_.size());
    records_.push_back(std::move(record));
}

const std::vector<std::size_t>& Dataset::group_indices(int group_id) const {
    static const std::vector<std::size_t> kEmpty;
    auto it = by_group_.find(group_id);
    return it == by_group_.end() ? kEmpty : it->second;
}

void Dataset::write(std::ostream& out) const {
    out << json{{"schema", kSchemaVersion}}.dump() << '\n';
    for (const auto& r : records_) out << record_to_json(r).dump() << '\n';
}

void Dataset::save(const std::string& path) const {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write performance data to '" + path + "'");
    write(out);
    if (!out) throw ConfigError("error while writing '" + path + "'");
}

Dataset Dataset::read(std::istream& in) {
    Dataset ds;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
        }
        if (!header_seen) {
            if (!j.is_object() || !j.contains("schema")) {
                throw ParseError("missing {\"schema\": 1} header", lineno);
            }
            if (j.at("schema") != kSchemaVersion) {
                throw ParseError("unsupported schema version " + j.at("schema").dump(), lineno);
            }
            header_seen = true;
            continue;
        }
        try {
            ds.append(record_from_json(j));
        } catch (const json::exception& e) {
            throw ParseError(std::string("malformed record: ") + e.what(), lineno);
        } catch (const DataError& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    return ds;
}

Dataset Dataset::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open performance data file '" + path + "'");
    return read(in);
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& points, const Eigen::VectorXd& targets) {
    if (points.rows() == 0 || targets.size() == 0) {
        throw DataError("cannot standardize an empty data set");
    }
    if (points.rows() != targets.size()) {
        throw ShapeError("point and target counts differ");
    }
    const double n = static_cast<double>(points.rows());
    Standardizer s;
    s.means_ = points.colwise().mean().transpose();
    s.stds_.resize(points.cols());
    for (Eigen::Index d = 0; d < points.cols(); ++d) {
        const double var = (points.col(d).array() - s.means_(d)).square().sum() / n;
        const double sd = std::sqrt(var);
        s.stds_(d) = sd < kMinStd ? 1.0 : sd;
    }
    s.target_mean_ = targets.mean();
    const double tvar = (targets.array() - s.target_mean_).square().sum() / n;
    const double tsd = std::sqrt(tvar);
    s.target_std_ = tsd < kMinStd ? 1.0 : tsd;
    return s;
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& points) const {
    if (points.cols() != means_.size()) throw ShapeError("feature dimension mismatch");
    return (points.rowwise() - means_.transpose()).array().rowwise() / stds_.transpose().array();
}

Eigen::VectorXd Standardizer::transform_point(std::span<const double> x) const {
    if (static_cast<Eigen::Index>(x.size()) != means_.size()) {
        throw ShapeError("feature dimension mismatch");
    }
    Eigen::VectorXd z(means_.size());
    for (Eigen::Index d = 0; d < z.size(); ++d) z(d) = (x[static_cast<std::size_t>(d)] - means_(d)) / stds_(d);
    return z;
}

Eigen::MatrixXd Standardizer::inverse_transform(const Eigen::MatrixXd& points) const {
    if (points.cols() != means_.size()) throw ShapeError("feature dimension mismatch");
    return (points.array().rowwise() * stds_.transpose().array()).matrix().rowwise() +
           means_.transpose();
}

Eigen::VectorXd Standardizer::transform_targets(const Eigen::VectorXd& y) const {
    return (y.array() - target_mean_) / target_std_;
}

Eigen::VectorXd Standardizer::inverse_targets(const Eigen::VectorXd& z) const {
    return (z.array() * target_std_ + target_mean_).matrix();
}

}  // namespace solsel
