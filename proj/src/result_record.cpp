#include "vtn/result_record.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "vtn/errors.hpp"
#include "vtn/fnv.hpp"

namespace vtn {

namespace {

nlohmann::json optional_metric(const std::optional<double>& v) {
    if (!v) return nullptr;
    if (!std::isfinite(*v)) throw NumericalError("result record: non-finite metric");
    return *v;
}

std::optional<double> read_metric(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

}  // namespace

std::string config_hash(const nlohmann::json& config) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(config.dump())));
    return buf;
}

nlohmann::json to_json(const ResultRecord& rec) {
    nlohmann::json j;
    j["command"] = rec.command;
    j["structure"] = {{"D", rec.order}, {"M", rec.memory}, {"R", rec.rank}, {"sweeps", rec.sweeps}};
    j["metrics"] = {{"rmse_train", optional_metric(rec.rmse_train)},
                    {"rmse_val", optional_metric(rec.rmse_val)},
                    {"rmse_test", optional_metric(rec.rmse_test)},
                    {"vaf", optional_metric(rec.vaf)}};
    j["weight_norm"] = rec.weight_norm;
    j["wall_time_ms"] = rec.wall_time_ms;
    j["seed"] = rec.seed;
    j["config_hash"] = rec.config_hash;
    return j;
}

ResultRecord result_from_json(const nlohmann::json& j) {
    ResultRecord rec;
    try {
        rec.command = j.value("command", std::string{});
        const auto& s = j.at("structure");
        rec.order = s.at("D").get<std::int64_t>();
        rec.memory = s.at("M").get<std::int64_t>();
        rec.rank = s.at("R").get<std::int64_t>();
        rec.sweeps = s.at("sweeps").get<std::int64_t>();
        const auto& m = j.at("metrics");
        rec.rmse_train = read_metric(m, "rmse_train");
        rec.rmse_val = read_metric(m, "rmse_val");
        rec.rmse_test = read_metric(m, "rmse_test");
        rec.vaf = read_metric(m, "vaf");
        rec.weight_norm = j.at("weight_norm").get<double>();
        rec.wall_time_ms = j.at("wall_time_ms").get<double>();
        rec.seed = j.at("seed").get<std::uint64_t>();
        rec.config_hash = j.at("config_hash").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("result record: ") + e.what());
    }
    return rec;
}

void write_json(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
    if (!out) throw FormatError("write failed for '" + path + "'");
}

nlohmann::json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
}

}  // namespace vtn
