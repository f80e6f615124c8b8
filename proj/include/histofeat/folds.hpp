#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace histofeat {

struct FoldPlan {
    int repeat_index = 0;
    std::uint64_t seed = 0;
    std::vector<std::vector<std::string>> folds;  // held-out unit ids, each sorted
};

// One plan per repeat, each a k-way partition of unit_ids.  With labels the
// split is stratified: units are dealt class by class onto a single cyclic
// fold cursor, so overall fold sizes and per-class counts both differ by at
// most one.  Classes smaller than k degrade to plain splitting (a warning is
// logged).  Repeat r draws from a seed derived from (seed, r).
std::vector<FoldPlan> make_fold_plan(const std::vector<std::string>& unit_ids,
                                     const std::optional<std::vector<int>>& labels, int k,
                                     int n_repeats, std::uint64_t seed);

}  // namespace histofeat
