#pragma once

// Acceptance criteria A1..A11. The full tier runs each criterion at its stated
// size and tolerance; the fast tier keeps the same pass rule on reduced grids
// and sample counts.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace airy {

enum class Tier { Fast, Full };

struct CriterionResult {
    std::string id;
    std::string title;
    bool pass = false;
    std::string detail;  // measured values against the pass rule
    double seconds = 0;
};

std::vector<std::string> criterion_ids();
CriterionResult run_criterion(const std::string& id, Tier tier, std::uint64_t seed = 20240601);

// Runs the listed ids (all when empty), calling report after each.
std::vector<CriterionResult> run_acceptance(Tier tier, const std::vector<std::string>& ids,
                                            std::uint64_t seed,
                                            const std::function<void(const CriterionResult&)>& report);

}  // namespace airy
