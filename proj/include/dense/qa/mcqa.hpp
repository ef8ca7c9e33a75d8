#pragma once

#include <map>
#include <string>
#include <vector>

#include "dense/core/rng.hpp"
#include "dense/core/types.hpp"

namespace dense::qa {

// Same-language data of every scene in the batch, keyed by scene id.
struct CrossSceneData {
  std::map<std::string, std::vector<std::string>> object_lists;
  std::map<std::string, std::string> anomaly_answers;
  // Individual statements behind each anomaly answer; widen the distractor pool.
  std::map<std::string, std::vector<std::string>> anomaly_statements;
};

struct McqaConfig {
  std::size_t option_count = 4;
};

// Converts one OEQA. Errors: INSUFFICIENT_DISTRACTORS, NOT_CONVERTIBLE
// (dense descriptions, or not an OEQA).
QaPair convert_to_mcqa(const QaPair& oeqa, const CrossSceneData& cross, Rng& rng, const McqaConfig& config = {});

struct Skipped {
  QaCategory category;
  std::string detail;
};

struct McqaBatch {
  std::vector<QaPair> pairs;
  std::vector<Skipped> skipped;
};

// Every convertible OEQA of one scene, in input order; failures are skipped.
McqaBatch generate_mcqa(const std::vector<QaPair>& oeqa_for_scene, const CrossSceneData& cross, Rng& rng,
                        const McqaConfig& config = {});

}  // namespace dense::qa
