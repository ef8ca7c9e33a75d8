#include "dense/qa/mcqa.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "dense/core/error.hpp"
#include "dense/core/taxonomy.hpp"
#include "dense/qa/schema.hpp"

namespace dense::qa {

namespace {

std::string fold(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Appends unseen candidates, comparing case-insensitively.
void add_unique(std::vector<std::string>& pool, std::set<std::string>& seen, const std::string& candidate) {
  if (candidate.empty()) return;
  if (seen.insert(fold(candidate)).second) pool.push_back(candidate);
}

const std::vector<std::string>& own_objects(const CrossSceneData& cross, const std::string& scene) {
  static const std::vector<std::string> none;
  const auto it = cross.object_lists.find(scene);
  return it == cross.object_lists.end() ? none : it->second;
}

}  // namespace

QaPair convert_to_mcqa(const QaPair& oeqa, const CrossSceneData& cross, Rng& rng, const McqaConfig& config) {
  if (oeqa.kind != QaKind::Oeqa) throw Error("NOT_CONVERTIBLE", "input is already multiple-choice");
  if (oeqa.category == QaCategory::DenseDescription) {
    throw Error("NOT_CONVERTIBLE", "dense descriptions stay open-ended");
  }
  if (config.option_count < 2) throw Error("INVALID_CONFIG", "need at least two options");

  const std::string scene = oeqa.scene_id.str();
  const auto& own = own_objects(cross, scene);
  std::string answer = oeqa.answer;
  std::string question = oeqa.question;
  std::vector<std::string> pool;
  std::set<std::string> seen;

  switch (oeqa.category) {
    case QaCategory::Localization:
    case QaCategory::SizeComparison:
    case QaCategory::DistanceReasoning:
      seen.insert(fold(answer));
      for (const auto& o : own) add_unique(pool, seen, o);
      break;
    case QaCategory::ObjectPresence: {
      if (own.empty()) throw Error("INSUFFICIENT_DISTRACTORS", "scene " + scene + " has no identified objects");
      answer = own[rng.below(own.size())];
      question = kPresenceQuestion;
      for (const auto& o : own) seen.insert(fold(o));
      for (const auto& [other, list] : cross.object_lists) {
        if (other == scene) continue;
        for (const auto& o : list) add_unique(pool, seen, o);
      }
      break;
    }
    case QaCategory::SceneClassification:
      seen.insert(fold(answer));
      for (const auto& s : taxonomy::subcategories()) add_unique(pool, seen, std::string(s.name));
      break;
    case QaCategory::AnomalyDetection:
      seen.insert(fold(answer));
      add_unique(pool, seen, kNoAnomaly);
      for (const auto& [other, text] : cross.anomaly_answers) {
        if (other != scene) add_unique(pool, seen, text);
      }
      for (const auto& [other, items] : cross.anomaly_statements) {
        if (other == scene) continue;
        for (const auto& item : items) add_unique(pool, seen, item);
      }
      break;
    case QaCategory::DenseDescription:
      break;
  }

  const std::size_t needed = config.option_count - 1;
  if (pool.size() < needed) {
    throw Error("INSUFFICIENT_DISTRACTORS",
                std::string(to_string(oeqa.category)) + " for scene " + scene + ": " + std::to_string(pool.size()) +
                    " candidate(s), " + std::to_string(needed) + " needed",
                {{"category", to_string(oeqa.category)}, {"available", pool.size()}});
  }

  QaPair mc;
  mc.scene_id = oeqa.scene_id;
  mc.language = oeqa.language;
  mc.category = oeqa.category;
  mc.question = std::move(question);
  mc.kind = QaKind::Mcqa;
  mc.options = rng.sample(std::move(pool), needed);
  const std::size_t at = rng.below(config.option_count);
  mc.options.insert(mc.options.begin() + static_cast<std::ptrdiff_t>(at), answer);
  mc.correct_index = static_cast<int>(at);
  mc.answer = std::move(answer);
  return mc;
}

McqaBatch generate_mcqa(const std::vector<QaPair>& oeqa_for_scene, const CrossSceneData& cross, Rng& rng,
                        const McqaConfig& config) {
  McqaBatch batch;
  for (const auto& qa : oeqa_for_scene) {
    if (qa.kind != QaKind::Oeqa || qa.category == QaCategory::DenseDescription) continue;
    try {
      batch.pairs.push_back(convert_to_mcqa(qa, cross, rng, config));
    } catch (const Error& e) {
      if (e.code() != "INSUFFICIENT_DISTRACTORS") throw;
      batch.skipped.push_back({qa.category, e.detail()});
    }
  }
  return batch;
}

}  // namespace dense::qa
