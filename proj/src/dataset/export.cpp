#include "dense/dataset/export.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include "dense/core/error.hpp"
#include "dense/core/json.hpp"
#include "dense/core/rng.hpp"
#include "dense/dataset/conversation.hpp"
#include "dense/dataset/split.hpp"
#include "dense/geometry/glb.hpp"
#include "dense/geometry/npy.hpp"
#include "dense/geometry/sampler.hpp"
#include "dense/pointing/format.hpp"
#include "dense/qa/mcqa.hpp"
#include "dense/qa/pipeline.hpp"

namespace dense::dataset {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Shape s) {
  switch (s) {
    case Shape::MldcMcA: return "mldc_mc_a";
    case Shape::MldcMcB: return "mldc_mc_b";
    case Shape::Mldc3d: return "mldc_3d";
  }
  return "?";
}

std::optional<Shape> parse_shape(std::string_view s) {
  for (Shape v : {Shape::MldcMcA, Shape::MldcMcB, Shape::Mldc3d}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

Shape shape_for(const Task& task) {
  if (task.kind == AssetKind::Scene3D) return Shape::Mldc3d;
  return task.prompt_profile == PromptProfile::PartB ? Shape::MldcMcB : Shape::MldcMcA;
}

const char* to_string(JobStatus s) {
  switch (s) {
    case JobStatus::Queued: return "QUEUED";
    case JobStatus::Running: return "RUNNING";
    case JobStatus::Done: return "DONE";
    case JobStatus::Failed: return "FAILED";
  }
  return "?";
}

std::optional<JobStatus> parse_job_status(std::string_view s) {
  for (JobStatus v : {JobStatus::Queued, JobStatus::Running, JobStatus::Done, JobStatus::Failed}) {
    if (s == to_string(v)) return v;
  }
  return std::nullopt;
}

void to_json(json& j, const ExportJob& job) {
  j = {{"job_id", job.job_id},
       {"task_id", job.task_id},
       {"org_id", job.org_id},
       {"shape", to_string(job.shape)},
       {"seed", job.seed},
       {"per_subcategory_test", job.per_subcategory_test},
       {"status", to_string(job.status)},
       {"outputs", job.outputs},
       {"stats", job.stats},
       {"warnings", job.warnings},
       {"error", job.error ? json(*job.error) : json(nullptr)}};
}

void from_json(const json& j, ExportJob& job) {
  job.job_id = j.at("job_id").get<JobId>();
  job.task_id = j.at("task_id").get<TaskId>();
  job.org_id = j.value("org_id", OrgId{});
  job.shape = parse_shape(j.at("shape").get<std::string>()).value_or(Shape::MldcMcA);
  job.seed = j.value("seed", std::uint64_t{0});
  job.per_subcategory_test = j.value("per_subcategory_test", std::size_t{2});
  job.status = parse_job_status(j.at("status").get<std::string>()).value_or(JobStatus::Queued);
  job.outputs = j.value("outputs", std::vector<std::string>{});
  job.stats = j.value("stats", ExportStats{});
  job.warnings = j.value("warnings", std::vector<std::string>{});
  if (j.contains("error") && j["error"].is_string()) job.error = j["error"].get<std::string>();
}

fs::path export_dir(const fs::path& root, const TaskId& task, Shape shape) {
  return root / "export" / task.str() / to_string(shape);
}

namespace {

// Runs fn(i) for i in [0, n) on up to `workers` threads. The exception of the
// lowest failing index is rethrown, so failures are reported deterministically.
template <class Fn>
void parallel_for(std::size_t n, std::size_t workers, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto run = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t count = std::min(std::max<std::size_t>(workers, 1), n);
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < count; ++t) threads.emplace_back(run);
  if (n > 0) run();
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void write_file(const fs::path& path, std::string_view content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.close();
  if (!out) throw Error("IO_ERROR", "cannot write " + path.string());
}

std::string lines(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += s + "\n";
  return out;
}

// Collects files in a scratch directory, then swaps it in for the old output.
class OutputDir {
 public:
  OutputDir(const fs::path& root, const TaskId& task, Shape shape)
      : final_(export_dir(root, task, shape)), scratch_(final_.string() + ".partial") {
    fs::remove_all(scratch_);
    fs::create_directories(scratch_);
  }

  void write(const std::string& rel, std::string_view content) {
    write_file(scratch_ / rel, content);
    files_.push_back(rel);
  }

  ExportResult commit(Shape shape, ExportStats stats, std::vector<std::string> warnings) {
    fs::remove_all(final_);
    fs::rename(scratch_, final_);
    std::sort(files_.begin(), files_.end());
    return {shape, final_, files_, std::move(stats), std::move(warnings)};
  }

 private:
  fs::path final_;
  fs::path scratch_;
  std::vector<std::string> files_;
};

struct Prepared {
  std::map<std::string, const Asset*> assets;
  std::vector<const AnnotationSession*> sessions;  // accepted, by (asset, language, session id)
};

Prepared prepare(const ExportInput& in, Shape shape) {
  if (shape_for(in.task) != shape) {
    throw Error("SHAPE_MISMATCH", std::string("task ") + in.task.task_id.str() + " exports as " +
                                      to_string(shape_for(in.task)) + ", not " + to_string(shape));
  }
  Prepared p;
  for (const auto& a : in.assets) p.assets[a.asset_id.str()] = &a;
  for (const auto& s : in.sessions) {
    if (s.stage != Stage::Submitted || s.task_id != in.task.task_id) continue;
    if (!p.assets.count(s.asset_id.str())) continue;
    p.sessions.push_back(&s);
  }
  if (p.sessions.empty()) {
    throw Error("NO_ACCEPTED_SESSIONS", "task " + in.task.task_id.str() + " has no accepted sessions");
  }
  std::sort(p.sessions.begin(), p.sessions.end(), [](const AnnotationSession* a, const AnnotationSession* b) {
    return std::tie(a->asset_id, a->language, a->session_id) < std::tie(b->asset_id, b->language, b->session_id);
  });
  return p;
}

const std::string& transcript_of(const AnnotationSession& s, const Recording& r) {
  const std::string* t = r.effective_transcript();
  if (!t) {
    throw Error("TRANSCRIPTS_PENDING",
                "recording " + r.recording_id.str() + " of session " + s.session_id.str() + " is not transcribed yet",
                {{"session_id", s.session_id.str()}, {"recording_id", r.recording_id.str()}});
  }
  return *t;
}

bool is_flagged(const Recording& r, double threshold) { return r.discrepancy && *r.discrepancy >= threshold; }

json image_ref(const Asset& a) { return {{"asset_id", a.asset_id}, {"media_ref", a.media_ref}}; }

json transcript_entry(const AnnotationSession& s, const Recording& r, double threshold) {
  return {{"session_id", s.session_id},
          {"recording_id", r.recording_id},
          {"auto_transcript", r.auto_transcript ? json(*r.auto_transcript) : json(nullptr)},
          {"edited_transcript", r.edited_transcript ? json(*r.edited_transcript) : json(nullptr)},
          {"flagged", is_flagged(r, threshold)}};
}

std::string sample_key(const std::string& scene, const std::string& lang) { return scene + "_" + lang; }

std::string lowercase(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

ExportResult export_mldc_mc_a(const ExportInput& input, qa::LlmClient& llm, const ExportConfig& config,
                              const fs::path& root) {
  const Prepared p = prepare(input, Shape::MldcMcA);
  const double threshold = input.discrepancy_flag_threshold;

  struct Group {
    const Asset* asset;
    std::string language;
    std::vector<const AnnotationSession*> sessions;
  };
  std::vector<Group> groups;
  for (const auto* s : p.sessions) {
    if (groups.empty() || groups.back().asset->asset_id != s->asset_id || groups.back().language != s->language) {
      groups.push_back({p.assets.at(s->asset_id.str()), s->language, {}});
    }
    groups.back().sessions.push_back(s);
  }

  std::vector<Caption> captions(groups.size());
  std::vector<json> records(groups.size());
  parallel_for(groups.size(), config.workers, [&](std::size_t i) {
    const Group& g = groups[i];
    std::vector<std::pair<RecordingId, std::string>> texts;
    json contributing = json::array();
    bool flagged = false;
    for (const auto* s : g.sessions) {
      for (const auto& r : s->recordings) {
        if (!r.target.is_scene()) continue;
        texts.emplace_back(r.recording_id, transcript_of(*s, r));
        contributing.push_back(transcript_entry(*s, r, threshold));
        flagged = flagged || is_flagged(r, threshold);
      }
    }
    captions[i] = qa::summarize_captions(g.asset->asset_id, g.language, texts, llm);
    records[i] = {{"sample_id", sample_key(g.asset->asset_id.str(), g.language)},
                  {"image", image_ref(*g.asset)},
                  {"language", g.language},
                  {"caption", captions[i].text},
                  {"caption_source", captions[i].source},
                  {"contributing_transcripts", contributing},
                  {"flagged", flagged}};
  });

  OutputDir out(root, input.task.task_id, Shape::MldcMcA);
  std::string data;
  std::vector<std::string> ids;
  for (const auto& r : records) {
    data += r.dump() + "\n";
    ids.push_back(r["sample_id"].get<std::string>());
  }
  const ExportStats stats = compute_stats(captions);
  out.write("records.jsonl", data);
  out.write("manifest.txt", lines(ids));
  out.write("stats.txt", render_stats(stats));
  return out.commit(Shape::MldcMcA, stats, {});
}

ExportResult export_mldc_mc_b(const ExportInput& input, qa::LlmClient& llm, const ExportConfig& config,
                              const fs::path& root) {
  const Prepared p = prepare(input, Shape::MldcMcB);
  const double threshold = input.discrepancy_flag_threshold;

  std::vector<Caption> captions(p.sessions.size());
  std::vector<json> records(p.sessions.size());
  parallel_for(p.sessions.size(), config.workers, [&](std::size_t i) {
    const AnnotationSession& s = *p.sessions[i];
    const Asset& asset = *p.assets.at(s.asset_id.str());
    std::vector<std::pair<RecordingId, std::string>> texts;
    json contributing = json::array();
    bool flagged = false;
    for (const auto& r : s.recordings) {
      if (!r.target.is_scene()) continue;
      texts.emplace_back(r.recording_id, transcript_of(s, r));
      contributing.push_back(transcript_entry(s, r, threshold));
      flagged = flagged || is_flagged(r, threshold);
    }
    Caption c;
    if (texts.size() == 1) {
      c = {asset.asset_id, s.language, texts[0].second, CaptionSource::RawTranscript, {texts[0].first}};
    } else {
      c = qa::summarize_captions(asset.asset_id, s.language, texts, llm);
    }

    std::vector<PointAnnotation> points = s.points;
    std::stable_sort(points.begin(), points.end(),
                     [](const PointAnnotation& a, const PointAnnotation& b) { return a.order < b.order; });
    const std::string response = pointing::build_training_response(c.text, points);
    const auto parsed = pointing::parse_points(response);
    bool same = parsed.diagnostics.empty() && parsed.points.size() == points.size();
    for (std::size_t k = 0; same && k < points.size(); ++k) {
      same = parsed.points[k].name == points[k].name && parsed.points[k].x == points[k].x &&
             parsed.points[k].y == points[k].y;
    }
    if (!same) {
      throw Error("EXPORT_INVARIANT", "training response of session " + s.session_id.str() + " does not round-trip");
    }

    json triples = json::array();
    for (const auto& pt : points) triples.push_back({pt.name, pt.x.str(), pt.y.str()});
    records[i] = {{"sample_id", s.session_id},
                  {"image", image_ref(asset)},
                  {"language", s.language},
                  {"native_speaker", s.native_speaker},
                  {"caption", c.text},
                  {"caption_source", c.source},
                  {"training_response", response},
                  {"points", triples},
                  {"contributing_transcripts", contributing},
                  {"flagged", flagged}};
    captions[i] = std::move(c);
  });

  OutputDir out(root, input.task.task_id, Shape::MldcMcB);
  std::string data;
  std::vector<std::string> ids;
  for (const auto& r : records) {
    data += r.dump() + "\n";
    ids.push_back(r["sample_id"].get<std::string>());
  }
  const ExportStats stats = compute_stats(captions);
  out.write("records.jsonl", data);
  out.write("manifest.txt", lines(ids));
  out.write("stats.txt", render_stats(stats));
  return out.commit(Shape::MldcMcB, stats, {});
}

ExportResult export_mldc_3d(const ExportInput& input, qa::LlmClient& llm, const BlobLoader& blobs,
                            const ExportConfig& config, const fs::path& root) {
  const Prepared p = prepare(input, Shape::Mldc3d);
  const double threshold = input.discrepancy_flag_threshold;

  // Scenes with at least one accepted session, in id order.
  std::vector<const Asset*> scenes;
  for (const auto* s : p.sessions) {
    const Asset* a = p.assets.at(s->asset_id.str());
    if (scenes.empty() || scenes.back() != a) scenes.push_back(a);
  }
  std::vector<SceneLabel> labels;
  for (const auto* a : scenes) {
    labels.push_back({a->asset_id, a->scene_meta ? a->scene_meta->subcategory : std::string()});
  }
  const Split split = scene_balanced_split(labels, config.per_subcategory_test, config.seed);
  const std::set<AssetId> test_ids(split.test.begin(), split.test.end());

  std::vector<std::string> clouds(scenes.size());
  parallel_for(scenes.size(), config.workers, [&](std::size_t i) {
    const Asset& a = *scenes[i];
    const auto bytes = blobs ? blobs(a.media_ref) : std::nullopt;
    if (!bytes) {
      throw Error("MISSING_POINT_CLOUD", "no geometry for scene " + a.asset_id.str(),
                  {{"scene_id", a.asset_id.str()}, {"media_ref", a.media_ref}});
    }
    geometry::SamplerConfig sc;
    sc.n_points = config.n_points;
    sc.seed = derive_seed(config.seed, a.asset_id.str());
    clouds[i] = geometry::npy_bytes(geometry::sample_scene(geometry::parse_glb(*bytes), sc, a.asset_id));
  });

  struct Unit {
    const Asset* scene;
    std::string language;
    qa::SceneTranscriptBundle bundle;
    std::vector<std::pair<RecordingId, std::string>> scene_texts;
    Caption caption;
    qa::SceneExtraction extraction;
  };
  std::vector<Unit> units;
  std::vector<std::string> flagged;
  for (const auto* s : p.sessions) {
    const Asset* a = p.assets.at(s->asset_id.str());
    if (units.empty() || units.back().scene != a || units.back().language != s->language) {
      Unit u;
      u.scene = a;
      u.language = s->language;
      u.bundle.scene_id = a->asset_id;
      u.bundle.language = s->language;
      if (a->scene_meta) u.bundle.subcategory_hint = a->scene_meta->subcategory;
      if (a->objects) {
        for (const auto& o : *a->objects) {
          u.bundle.known_objects.push_back(o.name);
          u.bundle.object_transcripts.push_back({o.object_id, o.name, {}});
        }
      }
      units.push_back(std::move(u));
    }
    Unit& u = units.back();
    for (const auto& r : s->recordings) {
      const std::string& text = transcript_of(*s, r);
      if (is_flagged(r, threshold)) {
        char d[32];
        std::snprintf(d, sizeof d, "%.4f", *r.discrepancy);
        flagged.push_back(a->asset_id.str() + "\t" + s->session_id.str() + "\t" + r.recording_id.str() + "\t" + d);
      }
      if (r.target.is_scene()) {
        u.bundle.scene_transcripts.push_back(text);
        u.scene_texts.emplace_back(r.recording_id, text);
        continue;
      }
      for (auto& o : u.bundle.object_transcripts) {
        if (o.object_id == *r.target.object) o.texts.push_back(text);
      }
    }
  }

  parallel_for(units.size(), config.workers, [&](std::size_t i) {
    Unit& u = units[i];
    u.caption = qa::summarize_captions(u.scene->asset_id, u.language, u.scene_texts, llm);
    u.extraction = qa::extract_oeqa(u.bundle, llm);
  });

  std::map<std::string, qa::CrossSceneData> cross;
  for (const auto& u : units) {
    auto& c = cross[u.language];
    const std::string id = u.scene->asset_id.str();
    c.object_lists[id] = u.extraction.objects;
    if (u.extraction.anomaly_answer) c.anomaly_answers[id] = *u.extraction.anomaly_answer;
    c.anomaly_statements[id] = u.extraction.anomaly_items;
  }

  std::vector<ConversationSample> train, test;
  std::vector<std::string> warnings;
  std::vector<Caption> captions;
  for (const auto& u : units) {
    const std::string key = sample_key(u.scene->asset_id.str(), u.language);
    auto& bucket = test_ids.count(u.scene->asset_id) ? test : train;
    captions.push_back(u.caption);
    bucket.push_back(description_sample(key + "_description", u.scene->asset_id, u.caption.text));
    for (const auto& qa : u.extraction.oeqa) {
      bucket.push_back(qa_sample(key + "_oeqa_" + lowercase(to_string(qa.category)), qa));
    }
    Rng rng(derive_seed(config.seed, key + "/mcqa"));
    const auto batch = qa::generate_mcqa(u.extraction.oeqa, cross.at(u.language), rng, {config.option_count});
    for (const auto& qa : batch.pairs) {
      bucket.push_back(qa_sample(key + "_mcqa_" + lowercase(to_string(qa.category)), qa));
    }
    for (const auto& sk : batch.skipped) {
      warnings.push_back(key + "\t" + to_string(sk.category) + "\t" + sk.detail);
    }
  }

  for (const auto* bucket : {&train, &test}) {
    for (const auto& s : *bucket) {
      const auto problems = check_sample(s);
      if (!problems.empty()) throw Error("EXPORT_INVARIANT", "sample " + s.sample_id + ": " + problems.front());
    }
  }
  for (const auto& s : train) {
    if (test_ids.count(AssetId(s.object_id))) {
      throw Error("EXPORT_INVARIANT", "test scene " + s.object_id + " leaked into train");
    }
  }

  OutputDir out(root, input.task.task_id, Shape::Mldc3d);
  std::vector<std::string> all_ids;
  for (const auto& [name, bucket] : {std::pair{"train", &train}, std::pair{"test", &test}}) {
    std::string data;
    std::vector<std::string> ids;
    for (const auto& s : *bucket) {
      data += json(s).dump() + "\n";
      ids.push_back(s.sample_id);
    }
    all_ids.insert(all_ids.end(), ids.begin(), ids.end());
    out.write(std::string(name) + ".jsonl", data);
    out.write(std::string(name) + "_manifest.txt", lines(ids));
  }
  std::vector<std::string> split_lines;
  for (const auto& id : split.train) split_lines.push_back(id.str() + "\ttrain");
  for (const auto& id : split.test) split_lines.push_back(id.str() + "\ttest");
  std::sort(split_lines.begin(), split_lines.end());
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    out.write("clouds/" + scenes[i]->asset_id.str() + ".npy", clouds[i]);
  }
  const ExportStats stats = compute_stats(captions);
  out.write("manifest.txt", lines(all_ids));
  out.write("split.txt", lines(split_lines));
  out.write("flagged.txt", lines(flagged));
  out.write("warnings.txt", lines(warnings));
  out.write("stats.txt", render_stats(stats));
  return out.commit(Shape::Mldc3d, stats, warnings);
}

ExportResult run_export(Shape shape, const ExportInput& input, qa::LlmClient& llm, const BlobLoader& blobs,
                        const ExportConfig& config, const fs::path& root) {
  switch (shape) {
    case Shape::MldcMcA: return export_mldc_mc_a(input, llm, config, root);
    case Shape::MldcMcB: return export_mldc_mc_b(input, llm, config, root);
    case Shape::Mldc3d: return export_mldc_3d(input, llm, blobs, config, root);
  }
  throw Error("SHAPE_MISMATCH", "unknown shape");
}

}  // namespace dense::dataset
