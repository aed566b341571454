#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

namespace vtn {

struct ResultRecord {
    std::string command;
    std::int64_t order{0};
    std::int64_t memory{0};
    std::int64_t rank{0};
    std::int64_t sweeps{0};
    std::optional<double> rmse_train;
    std::optional<double> rmse_val;
    std::optional<double> rmse_test;
    std::optional<double> vaf;
    double weight_norm{0.0};
    double wall_time_ms{0.0};
    std::uint64_t seed{0};
    std::string config_hash;
};

/// 16 hex digits of FNV-1a over the canonical (key-sorted, compact) dump of `config`.
std::string config_hash(const nlohmann::json& config);

nlohmann::json to_json(const ResultRecord& rec);
ResultRecord result_from_json(const nlohmann::json& j);

void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

}  // namespace vtn
