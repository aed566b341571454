#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vtn/increment.hpp"
#include "vtn/volterra.hpp"

namespace vtn {

/// Inclusive integer range [lo, hi].
struct IntRange {
    Index lo{1};
    Index hi{1};

    bool contains(Index v) const { return v >= lo && v <= hi; }
    Index size() const { return hi >= lo ? hi - lo + 1 : 0; }
};

enum class InitKind { deterministic, random };

struct SelectionConfig {
    IntRange d_range{2, 2};
    IntRange m_range{1, 1};
    Index rank{1};
    /// Single-core ALS updates between structure increases.
    std::size_t sweeps{0};
    InitKind init{InitKind::deterministic};
    std::uint64_t seed{0};
    double accept_threshold{1e-4};
    Index m_delta{1};
    AlsConfig als{};
    /// Samples excluded from every metric. Defaults to M_max - 1 for grid/auto and M - 1 for single paths.
    std::optional<Index> transient_skip;
    /// Worker threads for grid_search (growth paths for different M run independently).
    unsigned threads{1};
    Index dense_guard{kDefaultReconstructGuard};

    void validate() const;
};

struct TraceRecord {
    Index order{0};
    Index memory{0};
    std::size_t sweeps_used{0};
    double rmse_train{0.0};
    double rmse_val{0.0};
    /// Residual VAF of the increase that produced this structure (0 for the starting point).
    double vaf_residual{0.0};
    double weight_norm{0.0};
    double wall_time_ms{0.0};
};

struct ChosenStructure {
    Index order{0};
    Index memory{0};
    std::size_t sweeps{0};
};

struct SelectionTrace {
    std::vector<TraceRecord> records;
    ChosenStructure chosen;
    std::optional<VolterraModel> chosen_model;
};

struct InitConfig {
    double tolerance{1e-12};
    Index dense_guard{kDefaultReconstructGuard};
};

/**
 * Dense minimum-norm LS fit of an order-1 or order-2 model, truncated to rank
 * `rank` by SVD of the (L*I x I) weight matrix. The result has site 0 and
 * sweeps to the right.
 */
VolterraModel deterministic_init(const TimeSeriesData& data, Index memory, Index rank, Index order = 2,
                                 const InitConfig& cfg = {});

/// Standard-normal cores with ranks (L, R, ..., R, 1), canonicalized onto the last core.
VolterraModel random_init(Index memory, Index rank, Index order, std::uint64_t seed, Index inputs = 1,
                          Index outputs = 1);

struct GrowResult {
    VolterraModel model;
    SelectionTrace trace;
};

/**
 * Runs `sweeps` core updates, then alternates increase_order and `sweeps`
 * updates until the order reaches `target_order`. One record per order.
 * When `val` is null, rmse_val is reported as NaN.
 */
GrowResult grow_to(const VolterraModel& model, const TimeSeriesData& train, const TimeSeriesData* val,
                   Index target_order, const SelectionConfig& cfg);

/// One growth path per memory length; chosen = argmin validation RMSE, ties to smaller (D, M).
SelectionTrace grid_search(const TimeSeriesData& train, const TimeSeriesData& val, const SelectionConfig& cfg);

/// Greedy order/memory increases accepted by residual VAF on the training data.
SelectionTrace auto_select(const TimeSeriesData& train, const TimeSeriesData& val, const SelectionConfig& cfg);

/// Core updates a growth path from order 2 to `order` spends with `sweeps` per step (at least `order`).
std::size_t growth_update_budget(Index order, std::size_t sweeps);

}  // namespace vtn
