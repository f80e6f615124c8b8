#include "histofeat/folds.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "histofeat/common.hpp"
#include "histofeat/logging.hpp"
#include "histofeat/rng.hpp"

namespace histofeat {

std::vector<FoldPlan> make_fold_plan(const std::vector<std::string>& unit_ids,
                                     const std::optional<std::vector<int>>& labels, int k,
                                     int n_repeats, std::uint64_t seed) {
    if (k < 2) throw InvalidPlan("k must be >= 2");
    if (n_repeats < 1) throw InvalidPlan("n_repeats must be >= 1");
    if (unit_ids.size() < std::size_t(k))
        throw InvalidPlan("need at least k units, got " + std::to_string(unit_ids.size()));
    {
        std::set<std::string> seen;
        for (const auto& id : unit_ids)
            if (!seen.insert(id).second) throw InvalidPlan("duplicate unit id: " + id);
    }
    if (labels) {
        if (labels->size() != unit_ids.size())
            throw InvalidPlan("stratification labels do not match units");
        std::map<int, int> class_sizes;
        for (int l : *labels) {
            if (l < 0) throw InvalidPlan("negative stratification label");
            ++class_sizes[l];
        }
        for (const auto& [cls, size] : class_sizes)
            if (size < k)
                log_event("stratification_warning",
                          {{"class", cls}, {"members", size}, {"k", k}});
    }

    std::vector<FoldPlan> plans;
    for (int r = 0; r < n_repeats; ++r) {
        FoldPlan plan;
        plan.repeat_index = r;
        plan.seed = derive_seed(seed, "folds", std::uint64_t(r));
        plan.folds.assign(std::size_t(k), {});
        Rng rng(plan.seed);

        std::vector<std::vector<std::size_t>> groups;
        if (labels) {
            std::map<int, std::vector<std::size_t>> by_class;
            for (std::size_t i = 0; i < unit_ids.size(); ++i) by_class[(*labels)[i]].push_back(i);
            for (auto& [cls, idx] : by_class) groups.push_back(std::move(idx));
        } else {
            std::vector<std::size_t> all(unit_ids.size());
            for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
            groups.push_back(std::move(all));
        }

        std::size_t cursor = 0;
        for (auto& group : groups) {
            rng.shuffle(group);
            for (std::size_t i : group) {
                plan.folds[cursor % std::size_t(k)].push_back(unit_ids[i]);
                ++cursor;
            }
        }
        for (auto& fold : plan.folds) std::sort(fold.begin(), fold.end());
        plans.push_back(std::move(plan));
    }
    return plans;
}

}  // namespace histofeat
