#pragma once

// The ten acceptance criteria as runnable checks, and the deterministic
// selftest report built from criteria 1-9.

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "dwitt/drw.hpp"
#include "dwitt/mixed.hpp"

namespace dwitt::acceptance {

constexpr unsigned default_seed = 1;
constexpr int schema_version = 1;
constexpr int criterion_count = 10;

struct Options {
    unsigned seed = default_seed;
    std::size_t adjunction_budget = mixed::default_adjunction_budget;
    std::size_t span_budget = drw::default_span_budget;
    unsigned saturation_cap = drw::default_saturation_cap;
};

struct Criterion {
    int id = 0;
    std::string title;
    double budget_seconds = 0;
    bool pass = false;
    bool skipped = false;  // a budget was exhausted
    double seconds = 0;
    std::string detail;
    nlohmann::json data;  // deterministic summary, no timings

    bool within_budget() const { return seconds < budget_seconds; }
    std::string status() const;  // PASS, FAIL or SKIP
    // "criterion 3 PASS ..." with the elapsed time against the budget.
    std::string line() const;
};

double budget_seconds(int id);
std::string title(int id);

// Runs one criterion; pass requires both the checks and the time budget.
// Criterion 10 runs the selftest twice and compares the reports byte for byte.
Criterion run_criterion(int id, const Options& o = {});

// Criteria 1-9 with their timings.
std::vector<Criterion> selftest_criteria(const Options& o = {});
// {"schema_version", "seed", "budgets", "criteria": [{id, title, status, detail, data}]}
nlohmann::json report(const Options& o, const std::vector<Criterion>& criteria);
nlohmann::json selftest(const Options& o = {});

}  // namespace dwitt::acceptance
