#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "histofeat/common.hpp"
#include "histofeat/folds.hpp"

using namespace histofeat;

namespace {

std::vector<std::string> make_ids(int n, const std::string& prefix = "u") {
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back(prefix + std::to_string(1000 + i));
    return ids;
}

void check_partition(const FoldPlan& plan, const std::vector<std::string>& ids, int k) {
    REQUIRE(int(plan.folds.size()) == k);
    std::set<std::string> seen;
    std::size_t total = 0;
    for (const auto& fold : plan.folds) {
        CHECK(std::is_sorted(fold.begin(), fold.end()));
        for (const auto& id : fold) CHECK(seen.insert(id).second);  // disjoint
        total += fold.size();
    }
    CHECK(total == ids.size());  // covers everything
    for (const auto& id : ids) CHECK(seen.count(id) == 1);

    // Fold sizes differ by at most one.
    std::size_t lo = ids.size(), hi = 0;
    for (const auto& fold : plan.folds) {
        lo = std::min(lo, fold.size());
        hi = std::max(hi, fold.size());
    }
    CHECK(hi - lo <= 1);
}

}  // namespace

TEST_CASE("fold plans partition, balance, and stratify") {
    const int k = 4, repeats = 7;
    auto ids = make_ids(23);
    std::vector<int> labels(23);
    for (int i = 0; i < 23; ++i) labels[i] = i < 10 ? 0 : (i < 18 ? 1 : 2);

    auto plans = make_fold_plan(ids, labels, k, repeats, 99);
    REQUIRE(plans.size() == std::size_t(repeats));

    std::map<std::string, int> label_of;
    for (int i = 0; i < 23; ++i) label_of[ids[i]] = labels[i];

    for (int r = 0; r < repeats; ++r) {
        CHECK(plans[r].repeat_index == r);
        check_partition(plans[r], ids, k);

        // Per-class counts across folds differ by at most one.
        for (int cls = 0; cls < 3; ++cls) {
            std::size_t lo = ids.size(), hi = 0;
            for (const auto& fold : plans[r].folds) {
                std::size_t c = 0;
                for (const auto& id : fold) c += label_of[id] == cls;
                lo = std::min(lo, c);
                hi = std::max(hi, c);
            }
            CHECK(hi - lo <= 1);
        }
    }

    // Repeats differ from each other.
    CHECK(plans[0].folds != plans[1].folds);
}

TEST_CASE("plans reproduce bitwise from the seed") {
    auto ids = make_ids(40);
    std::vector<int> labels(40);
    for (int i = 0; i < 40; ++i) labels[i] = i % 5;

    auto a = make_fold_plan(ids, labels, 5, 10, 1234);
    auto b = make_fold_plan(ids, labels, 5, 10, 1234);
    REQUIRE(a.size() == b.size());
    for (std::size_t r = 0; r < a.size(); ++r) {
        CHECK(a[r].seed == b[r].seed);
        CHECK(a[r].folds == b[r].folds);
    }

    auto c = make_fold_plan(ids, labels, 5, 10, 1235);
    bool any_diff = false;
    for (std::size_t r = 0; r < a.size(); ++r) any_diff |= (a[r].folds != c[r].folds);
    CHECK(any_diff);
}

TEST_CASE("unlabeled splits stay balanced") {
    auto ids = make_ids(17);
    auto plans = make_fold_plan(ids, std::nullopt, 4, 3, 5);
    for (const auto& plan : plans) check_partition(plan, ids, 4);
}

TEST_CASE("classes smaller than k degrade without error") {
    auto ids = make_ids(12);
    std::vector<int> labels(12, 0);
    labels[11] = 1;  // a single-member class with k = 3
    auto plans = make_fold_plan(ids, labels, 3, 2, 8);
    for (const auto& plan : plans) check_partition(plan, ids, 3);
}

TEST_CASE("plan validation") {
    auto ids = make_ids(6);
    CHECK_THROWS_AS(make_fold_plan(ids, std::nullopt, 1, 1, 0), InvalidPlan);
    CHECK_THROWS_AS(make_fold_plan(ids, std::nullopt, 7, 1, 0), InvalidPlan);
    CHECK_THROWS_AS(make_fold_plan(ids, std::nullopt, 2, 0, 0), InvalidPlan);

    auto dup = ids;
    dup[1] = dup[0];
    CHECK_THROWS_AS(make_fold_plan(dup, std::nullopt, 2, 1, 0), InvalidPlan);

    std::vector<int> short_labels(5, 0);
    CHECK_THROWS_AS(make_fold_plan(ids, short_labels, 2, 1, 0), InvalidPlan);
    std::vector<int> negative(6, 0);
    negative[2] = -1;
    CHECK_THROWS_AS(make_fold_plan(ids, negative, 2, 1, 0), InvalidPlan);
}
