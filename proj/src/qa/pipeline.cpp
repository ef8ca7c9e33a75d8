#include "dense/qa/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <set>

#include "dense/core/json.hpp"
#include "dense/core/taxonomy.hpp"
#include "dense/core/utf8.hpp"
#include "dense/qa/schema.hpp"

namespace dense::qa {

using nlohmann::json;

namespace {

const char* const kSummarySystem =
    "You merge several spoken descriptions of the same image or scene into one caption. Keep every concrete detail "
    "the speakers give, drop repetitions and filler, and answer in the language of the input. Reply with a JSON "
    "object {\"text\": \"...\"}.";

std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

[[noreturn]] void bad_response(QaCategory c, const std::string& why) {
  throw Error("BAD_LLM_RESPONSE", std::string(to_string(c)) + ": " + why);
}

std::string render(std::initializer_list<std::pair<const char*, std::string>> lines) {
  std::string out;
  for (const auto& [k, v] : lines) out += std::string(k) + ": " + v + "\n";
  return out;
}

std::string labels_line() {
  json names = json::array();
  for (const auto& s : taxonomy::subcategories()) names.push_back(std::string(s.name));
  return names.dump();
}

std::vector<std::string> clean_list(const json& arr) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  if (!arr.is_array()) return out;
  for (const auto& x : arr) {
    if (!x.is_string()) continue;
    std::string s(utf8::trim(x.get<std::string>()));
    if (s.empty() || !seen.insert(lower(s)).second) continue;
    out.push_back(std::move(s));
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
  return out;
}

std::optional<std::string> canonical_label(const std::string& label) {
  const std::string want = lower(std::string(utf8::trim(label)));
  for (const auto& s : taxonomy::subcategories()) {
    if (lower(std::string(s.name)) == want) return std::string(s.name);
  }
  return std::nullopt;
}

}  // namespace

std::optional<json> json_payload(const std::string& reply) {
  for (std::size_t start = reply.find('{'); start != std::string::npos; start = reply.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = start; i < reply.size(); ++i) {
      const char c = reply[i];
      if (in_string) {
        if (c == '\\') ++i;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) {
        auto j = json::parse(reply.substr(start, i - start + 1), nullptr, false);
        if (j.is_object()) return j;
        break;
      }
    }
  }
  return std::nullopt;
}

Caption summarize_captions(const AssetId& asset_id, const std::string& language,
                           const std::vector<std::pair<RecordingId, std::string>>& transcripts, LlmClient& client) {
  if (transcripts.empty()) throw Error("EMPTY_INPUT", "no transcripts to summarize for " + asset_id.str());
  json texts = json::array();
  Caption c;
  c.asset_id = asset_id;
  c.language = language;
  c.source = CaptionSource::Summarized;
  for (const auto& [id, text] : transcripts) {
    texts.push_back(text);
    c.contributing_recording_ids.push_back(id);
  }
  const std::string reply =
      client.complete(kSummarySystem, render({{"task", "summarize"}, {"scene_id", asset_id.str()}, {"language", language},
                                              {"transcripts", texts.dump()}}));
  const auto payload = json_payload(reply);
  if (payload && payload->contains("text") && (*payload)["text"].is_string()) {
    c.text = (*payload)["text"].get<std::string>();
  } else {
    c.text = std::string(utf8::trim(reply));
  }
  if (utf8::trim(c.text).empty()) throw Error("BAD_LLM_RESPONSE", "empty summary for " + asset_id.str());
  return c;
}

SceneExtraction extract_oeqa(const SceneTranscriptBundle& bundle, LlmClient& client) {
  std::vector<std::string> object_texts;
  for (const auto& o : bundle.object_transcripts) {
    for (const auto& t : o.texts) object_texts.push_back(t);
  }
  if (bundle.scene_transcripts.empty() && object_texts.empty()) {
    throw Error("MISSING_SOURCE", "scene " + bundle.scene_id.str() + " has no transcripts in " + bundle.language);
  }

  SceneExtraction out;
  out.scene_id = bundle.scene_id;
  out.language = bundle.language;
  const json known = bundle.known_objects;

  for (const auto& schema : schemas()) {
    const bool dense = schema.category == QaCategory::DenseDescription;
    const auto& source = dense ? object_texts : bundle.scene_transcripts;
    if (source.empty()) continue;

    std::string user = render({{"scene_id", bundle.scene_id.str()},
                               {"category", to_string(schema.category)},
                               {"language", bundle.language},
                               {"question", schema.question},
                               {"known_objects", known.dump()}});
    if (schema.category == QaCategory::SceneClassification) {
      user += render({{"labels", labels_line()}});
      if (bundle.subcategory_hint) user += render({{"subcategory_hint", *bundle.subcategory_hint}});
    }
    user += render({{"transcripts", json(source).dump()}});

    const std::string reply = client.complete(schema.instructions, user);
    const auto payload = json_payload(reply);
    if (!payload) bad_response(schema.category, "reply is not a JSON object");

    QaPair qa;
    qa.scene_id = bundle.scene_id;
    qa.language = bundle.language;
    qa.category = schema.category;
    qa.question = schema.question;
    qa.kind = QaKind::Oeqa;

    switch (schema.category) {
      case QaCategory::SceneClassification: {
        std::optional<std::string> label;
        if (payload->contains("label") && (*payload)["label"].is_string()) label = canonical_label((*payload)["label"]);
        if (!label && bundle.subcategory_hint) label = canonical_label(*bundle.subcategory_hint);
        if (!label) bad_response(schema.category, "label is not a known scene type");
        qa.answer = *label;
        break;
      }
      case QaCategory::ObjectPresence: {
        out.objects = clean_list(payload->value("objects", json::array()));
        if (out.objects.empty()) bad_response(schema.category, "no objects identified");
        qa.answer = join(out.objects, ", ");
        break;
      }
      case QaCategory::Localization:
      case QaCategory::SizeComparison:
      case QaCategory::DistanceReasoning: {
        const auto objs = clean_list(payload->value("objects", json::array()));
        if (objs.empty()) bad_response(schema.category, "no object given");
        qa.answer = objs.front();
        break;
      }
      case QaCategory::AnomalyDetection: {
        const auto items = clean_list(payload->value("items", json::array()));
        qa.answer = items.empty() ? kNoAnomaly : join(items, " ");
        out.anomaly_answer = qa.answer;
        out.anomaly_items = items;
        break;
      }
      case QaCategory::DenseDescription: {
        if (!payload->contains("text") || !(*payload)["text"].is_string()) bad_response(schema.category, "missing text");
        qa.answer = std::string(utf8::trim((*payload)["text"].get<std::string>()));
        if (qa.answer.empty()) bad_response(schema.category, "empty text");
        break;
      }
    }
    out.oeqa.push_back(std::move(qa));
  }
  return out;
}

}  // namespace dense::qa
