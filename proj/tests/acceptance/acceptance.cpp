// Acceptance run: one PASS/FAIL line per criterion, exit status 1 on any FAIL.

#include <array>
#include <atomic>
#include <barrier>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <thread>

#include "dense/core/error.hpp"
#include "dense/core/rng.hpp"
#include "dense/core/taxonomy.hpp"
#include "dense/core/validate.hpp"
#include "dense/dataset/split.hpp"
#include "dense/dataset/stats.hpp"
#include "dense/geometry/glb.hpp"
#include "dense/geometry/npy.hpp"
#include "dense/geometry/sampler.hpp"
#include "dense/pointing/format.hpp"
#include "dense/qa/llm.hpp"
#include "dense/qa/mcqa.hpp"
#include "dense/workflow/engine.hpp"
#include "support/files.hpp"
#include "support/generators.hpp"
#include "support/glb_builder.hpp"
#include "support/harness.hpp"
#include "support/lifecycle.hpp"
#include "support/qa_fixture.hpp"

using namespace dense;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Collects the first failed expectation of a criterion.
struct Check {
  std::string failure;
  std::string detail;
  void expect(bool ok, const std::string& what) {
    if (!ok && failure.empty()) failure = what;
  }
};

int g_failed = 0;

void criterion(const char* name, double limit_s, const std::function<void(Check&)>& body) {
  Check c;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(c);
  } catch (const Error& e) {
    c.expect(false, "threw " + e.code() + ": " + e.detail());
  } catch (const std::exception& e) {
    c.expect(false, std::string("threw ") + e.what());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (limit_s > 0) c.expect(secs < limit_s, "runtime over limit");
  const bool ok = c.failure.empty();
  if (!ok) ++g_failed;
  char timing[64];
  if (limit_s > 0) {
    std::snprintf(timing, sizeof timing, "%.2f s < %.0f s", secs, limit_s);
  } else {
    std::snprintf(timing, sizeof timing, "%.2f s", secs);
  }
  std::printf("%s  %-22s %s [%s]\n", ok ? "PASS" : "FAIL", name, ok ? c.detail.c_str() : c.failure.c_str(), timing);
  std::fflush(stdout);
}

template <class F>
std::string error_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

std::string fmt(const char* f, double a, double b = 0) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

void point_format(Check& c) {
  using pointing::parse_points;
  Rng rng(20240611);
  int failures = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::string cap = testgen::caption(rng);
    const auto pts = testgen::point_list(rng);
    const auto r = parse_points(pointing::build_training_response(cap, pts));
    if (r.residual != cap || r.points != pts || !r.diagnostics.empty()) ++failures;
  }
  c.expect(failures == 0, std::to_string(failures) + " of 1000 round trips failed");
  const auto lit = parse_points("a table with food\n<point>65.20,63.90</point> table; <point>52.60,58.60</point> food; ");
  const bool exact = lit.points.size() == 2 && lit.points[0].name == "table" && lit.points[0].x.str() == "65.20" &&
                     lit.points[0].y.str() == "63.90" && lit.points[1].name == "food" &&
                     lit.points[1].x.str() == "52.60" && lit.points[1].y.str() == "58.60";
  c.expect(exact, "literal example did not parse to [(table,65.20,63.90),(food,52.60,58.60)]");
  c.detail = "1000/1000 round trips; literal example exact";
}

void sampler_math(Check& c) {
  using namespace geometry;
  const Vec3 v1{1, 2, 3}, v2{-4, 5, 0.5}, v3{7, -1, 2};
  c.expect(point_from_weights(v1, v2, v3, fold_weights(1.0, 0.0)).position == v1, "vertex weights (1,0)");
  c.expect(point_from_weights(v1, v2, v3, fold_weights(0.0, 1.0)).position == v2, "vertex weights (0,1)");
  c.expect(point_from_weights(v1, v2, v3, fold_weights(1.0, 1.0)).position == v3, "fold of (1,1)");
  const auto refl = fold_weights(0.75, 0.5);
  c.expect(refl.r1 == 0.25 && refl.r2 == 0.5 && refl.r3 == 0.25, "fold of (0.75,0.5)");

  Rng rng(12345);
  double sx = 0, sy = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto s = sample_point_on_triangle({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, rng);
    sx += s.position.x;
    sy += s.position.y;
  }
  const double cx = sx / n, cy = sy / n;
  c.expect(std::abs(cx - 1.0 / 3.0) < 0.01 && std::abs(cy - 1.0 / 3.0) < 0.01, fmt("centroid (%.4f,%.4f)", cx, cy));

  const std::vector<double> w = {1.0, 3.0};
  const auto counts = apportion(w, 8192);
  const auto near = [](std::size_t got, long want) { return std::labs(static_cast<long>(got) - want) <= 1; };
  c.expect(near(counts[0], 2048) && near(counts[1], 6144), "apportion(1:3, 8192)");

  // Same split observed on sampled points: two disjoint triangles of area 1 and 3.
  TriangleMesh m;
  m.node_name = m.node_path = "pair";
  m.vertices = {{0, 0, 0}, {1, 0, 0}, {0, 2, 0}, {10, 0, 0}, {13, 0, 0}, {10, 2, 0}};
  m.triangles = {{0, 1, 2}, {3, 4, 5}};
  SamplerConfig sc;
  sc.seed = 3;
  const auto cloud = sample_scene({m}, sc);
  std::size_t left = 0;
  for (std::size_t i = 0; i < cloud.n; ++i) left += cloud.at(i, 0) < 5.0f;
  c.expect(near(left, 2048) && near(cloud.n - left, 6144), "sampled split " + std::to_string(left));
  c.detail = fmt("centroid (%.4f,%.4f); ", cx, cy) + "apportion " + std::to_string(counts[0]) + "/" +
             std::to_string(counts[1]) + ", sampled " + std::to_string(left) + "/" + std::to_string(cloud.n - left);
}

void cloud_contract(Check& c) {
  using namespace geometry;
  const std::string glb = testfiles::fixture("scene_basic.glb");
  SamplerConfig sc;
  sc.seed = 424242;
  const auto cloud = sample_scene(parse_glb(glb), sc);
  const std::string a = npy_bytes(cloud);
  const std::string b = npy_bytes(sample_scene(parse_glb(glb), sc));
  const auto back = read_npy(a);
  c.expect(back.n == 8192 && back.points.size() == 8192 * 6, "shape is not (8192,6)");
  c.expect(a.find("'shape': (8192, 6)") != std::string::npos, "header shape");
  bool rgb = true;
  for (std::size_t i = 0; i < back.n; ++i) {
    for (std::size_t k = 3; k < 6; ++k) rgb = rgb && back.at(i, k) >= 0.0f && back.at(i, k) <= 1.0f;
  }
  c.expect(rgb, "RGB outside [0,1]");
  c.expect(a == b, "two runs differ");
  PointCloud zeros;
  zeros.n = 2;
  zeros.points.assign(12, 0.0f);
  c.expect(npy_bytes(zeros) == testfiles::fixture("zeros_2x6.npy"), "2x6 zero cloud differs from golden file");
  c.detail = "(8192,6), RGB in [0,1], " + std::to_string(a.size()) + " bytes identical twice; 2x6 golden equal";
}

void qc_gates(Check& c) {
  using namespace workflow;
  OrgId org("org-a");
  Asset image, scene;
  image.asset_id = AssetId("img-1");
  image.kind = AssetKind::Image2D;
  scene.asset_id = AssetId("scene-1");
  scene.kind = AssetKind::Scene3D;
  scene.scene_meta = SceneMeta{"Home", "Bedroom", Site::Indoor};
  scene.objects = std::vector<SceneObject>{
      {ObjectId("o-bed"), "bed", "bed"}, {ObjectId("o-lamp"), "lamp", "lamp"}, {ObjectId("o-desk"), "desk", "desk"}};
  Task t2, t3;
  t2.task_id = TaskId("t-2d");
  t2.kind = AssetKind::Image2D;
  t2.asset_ids = {image.asset_id};
  t2.org_id = org;
  t3.task_id = TaskId("t-3d");
  t3.kind = AssetKind::Scene3D;
  t3.prompt_profile = PromptProfile::Scene;
  t3.asset_ids = {scene.asset_id};
  t3.org_id = org;
  const QcPolicy policy;
  int next = 0;
  auto rid = [&] { return RecordingId("r-" + std::to_string(next++)); };
  auto start = [&](const Task& t, const Asset& a) {
    return start_session(&t, &a, {PrincipalId("ann"), org, "en", true}, SessionId("s-" + std::to_string(next++)));
  };
  auto record = [&](const AnnotationSession& s, const Asset& a, RecordingTarget target, double secs) {
    return attach_recording(s, a, policy, std::move(target), "blob", secs, rid()).session;
  };
  auto points = [&](AnnotationSession s, int n) {
    for (int i = 0; i < n; ++i) {
      s = add_point(s, image, {"p" + std::to_string(i), Percent::from_hundredths(1000 * i), Percent::from_hundredths(500), 0});
    }
    return s;
  };
  auto codes = [](const SubmissionReport& r) {
    std::vector<std::string> out;
    for (const auto& f : r.failures) out.push_back(f.code);
    return out;
  };
  int passed = 0;
  auto gate = [&](bool ok, const char* what) {
    c.expect(ok, what);
    passed += ok;
  };

  auto four = record(points(start(t2, image), 4), image, RecordingTarget::scene(), 61.0);
  gate(codes(submit(four, image, policy).report) == std::vector<std::string>{"MIN_POINTS"}, "4-point 2D not rejected on MIN_POINTS");

  auto short_audio = record(points(start(t2, image), 5), image, RecordingTarget::scene(), 59.9);
  gate(codes(submit(short_audio, image, policy).report) == std::vector<std::string>{"MIN_DURATION"},
       "59.9 s not rejected on MIN_DURATION");

  auto obj = record(start(t3, scene), scene, RecordingTarget::for_object(ObjectId("o-bed")), 20.0);
  const auto missing = incomplete_objects(obj, scene, policy);
  gate(missing.size() == 2 && std::none_of(missing.begin(), missing.end(), [](const MissingObject& m) { return m.name == "bed"; }),
       "20.0 s object recording not accepted");

  auto fresh = start(t3, scene);
  gate(error_code([&] { record(fresh, scene, RecordingTarget::scene(), 70.0); }) == "STAGE_LOCKED",
       "scene recording allowed during object stage");

  gate(error_code([&] { record(start(t2, image), image, RecordingTarget::scene(), 186.0); }) == "DURATION_EXCEEDED",
       "186 s recording not rejected");

  auto full = start(t3, scene);
  for (const auto& o : *scene.objects) full = record(full, scene, RecordingTarget::for_object(o.object_id), 20.0);
  full = unlock_scene_stage(full, scene, policy);
  full = record(full, scene, RecordingTarget::scene(), 60.0);
  const auto out = submit(full, scene, policy);
  gate(out.report.accepted && out.submitted && out.submitted->stage == Stage::Submitted, "full 3D session not accepted");
  c.detail = std::to_string(passed) + "/6 gate outcomes (min 5 points, 60 s scene, 20 s object, 185 s cap)";
}

void split(Check& c) {
  const auto& subs = taxonomy::subcategories();
  c.expect(subs.size() == 50, "taxonomy does not have 50 subcategories");
  std::vector<dataset::SceneLabel> scenes;
  for (std::size_t i = 0; i < 898; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "s%04zu", i);
    scenes.push_back({AssetId(id), std::string(subs[i % subs.size()].name)});
  }
  const auto s = dataset::scene_balanced_split(scenes, 2, 7);
  c.expect(s.train.size() == 798 && s.test.size() == 100, "sizes not 798/100");
  std::map<AssetId, std::string> sub_of;
  for (const auto& x : scenes) sub_of[x.scene_id] = x.subcategory;
  std::map<std::string, int> per;
  for (const auto& id : s.test) ++per[sub_of.at(id)];
  bool two_each = per.size() == 50;
  for (const auto& [k, n] : per) two_each = two_each && n == 2;
  c.expect(two_each, "test set is not 2 per subcategory");
  auto shuffled = scenes;
  Rng rng(99);
  rng.shuffle(shuffled);
  const auto again = dataset::scene_balanced_split(shuffled, 2, 7);
  c.expect(again.train == s.train && again.test == s.test, "not deterministic under a fixed seed");
  c.detail = std::to_string(s.train.size()) + "/" + std::to_string(s.test.size()) + ", 2 per subcategory x 50, deterministic";
}

void mcqa(Check& c) {
  qa::MockLlmClient mock(testqa::mock_fixture());
  std::vector<qa::SceneExtraction> ex;
  qa::CrossSceneData cross;
  for (const auto& s : testqa::planted_scenes()) {
    ex.push_back(qa::extract_oeqa(testqa::bundle_for(s), mock));
    const auto& e = ex.back();
    cross.object_lists[e.scene_id.str()] = e.objects;
    if (e.anomaly_answer) cross.anomaly_answers[e.scene_id.str()] = *e.anomaly_answer;
    cross.anomaly_statements[e.scene_id.str()] = e.anomaly_items;
  }
  std::array<int, 4> hist{};
  int total = 0, bad_options = 0, bad_distractors = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed * 7919 + 1);
    for (std::size_t i = 0; i < ex.size(); ++i) {
      const auto& planted = testqa::planted_scenes()[i];
      const std::set<std::string> own(planted.objects.begin(), planted.objects.end());
      for (const auto& q : qa::generate_mcqa(ex[i].oeqa, cross, rng).pairs) {
        const std::set<std::string> uniq(q.options.begin(), q.options.end());
        const bool answer_in = q.correct_index && q.options.at(static_cast<std::size_t>(*q.correct_index)) == q.answer;
        if (q.options.size() != 4 || uniq.size() != 4 || !answer_in || !validate(q, 4).empty()) ++bad_options;
        if (!q.correct_index) continue;
        ++hist[static_cast<std::size_t>(*q.correct_index)];
        ++total;
        for (std::size_t k = 0; k < q.options.size(); ++k) {
          if (static_cast<int>(k) == *q.correct_index) continue;
          const bool in_scene = own.count(q.options[k]) == 1;
          switch (q.category) {
            case QaCategory::Localization:
            case QaCategory::SizeComparison:
            case QaCategory::DistanceReasoning: bad_distractors += !in_scene; break;
            case QaCategory::ObjectPresence: bad_distractors += in_scene; break;
            default: break;
          }
        }
      }
    }
  }
  c.expect(total >= 1000, "only " + std::to_string(total) + " questions");
  c.expect(bad_options == 0, std::to_string(bad_options) + " questions without 4 unique options containing the answer");
  c.expect(bad_distractors == 0, std::to_string(bad_distractors) + " distractors break the in-scene/absent rule");
  std::string freq;
  for (int h : hist) {
    const double f = total ? static_cast<double>(h) / total : 0.0;
    c.expect(std::abs(f - 0.25) <= 0.05, fmt("correct_index frequency %.3f", f));
    freq += (freq.empty() ? "" : " ") + fmt("%.3f", f);
  }
  c.detail = std::to_string(total) + " questions, 0 option/distractor violations, index freq " + freq;
}

void stats(Check& c) {
  const std::string text = "桌子上有一碗面，旁边是一杯茶。";
  const auto st = dataset::compute_stats({{AssetId("i1"), "zh", text, CaptionSource::Summarized, {}}});
  const auto& zh = st.at("zh");
  c.expect(zh.median_word_count == 1, "word count " + std::to_string(zh.median_word_count));
  c.expect(zh.median_char_count == 15, "char count " + std::to_string(zh.median_char_count));
  c.detail = "words " + std::to_string(zh.median_word_count) + ", chars " + std::to_string(zh.median_char_count);
}

void end_to_end(Check& c) {
  const fs::path root = fs::temp_directory_path() / "dense_acceptance_e2e";
  const auto a = testlife::run_lifecycle(root / "a", 7, 11);
  c.expect(a.ok, "lifecycle: " + a.failure);
  if (!a.ok) return;
  const auto b = testlife::run_lifecycle(root / "b", 7, 11);
  c.expect(b.ok, "rerun: " + b.failure);
  std::size_t manifests = 0;
  for (const auto& [path, bytes] : a.files) {
    manifests += path.size() >= 12 && path.compare(path.size() - 12, 12, "manifest.txt") == 0;
  }
  c.expect(manifests > 0, "no manifests");
  c.expect(a.samples > 0, "no conversation samples");
  for (const auto& t : a.first_human_turns) c.expect(t.rfind("<point>", 0) == 0, "first human turn lacks <point>");
  c.expect(a.clouds > 0, "no clouds");
  c.expect(a.files == b.files, "rerun is not byte-identical");
  fs::remove_all(root);
  c.detail = std::to_string(a.files.size()) + " files (" + std::to_string(manifests) + " manifests, " +
             std::to_string(a.clouds) + " cloud), " + std::to_string(a.samples) + " samples, rerun identical";
}

void concurrency(Check& c) {
  testsvc::Harness h("acceptance_concurrency");
  const std::string png = testglb::encode_png(2, 2, std::vector<std::uint8_t>(16, 128));
  const std::string asset = h.svc->upload_asset(h.admin_a(), png, json::object())["asset"]["asset_id"];
  const std::string task =
      h.svc->create_task(h.admin_a(), {{"title", "t"}, {"kind", "IMAGE_2D"}, {"asset_ids", {asset}}})["task_id"];
  const std::string sid =
      h.svc->start_session(h.ann_a1(), {{"task_id", task}, {"asset_id", asset}, {"language", "en"}})["session_id"];
  int rounds_ok = 0;
  const int rounds = 50;
  for (int round = 0; round < rounds; ++round) {
    const auto v = h.svc->get_session(h.ann_a1(), sid)["version"].get<std::int64_t>();
    std::barrier sync(2);
    std::atomic<int> wins{0}, conflicts{0};
    auto writer = [&](int id) {
      sync.arrive_and_wait();
      try {
        h.svc->add_point(h.ann_a1(), sid, {{"name", "w" + std::to_string(id)}, {"x", "1"}, {"y", "1"}, {"version", v}});
        ++wins;
      } catch (const Error& e) {
        conflicts += e.code() == "CONFLICT";
      }
    };
    std::thread t0(writer, 0), t1(writer, 1);
    t0.join();
    t1.join();
    rounds_ok += wins == 1 && conflicts == 1;
  }
  c.expect(rounds_ok == rounds, std::to_string(rounds - rounds_ok) + " barrier rounds without exactly one winner");

  // Random request sequences from both orgs; every response body is scanned
  // for the other org's ids, and every cross-org probe must be NOT_FOUND.
  Rng rng(77);
  const std::array<const service::Principal*, 2> admins = {&h.admin_a(), &h.admin_b()};
  const std::array<const service::Principal*, 2> anns = {&h.ann_a1(), &h.ann_b1()};
  std::array<std::vector<std::string>, 2> ids, tasks, assets, sessions;
  std::vector<std::pair<int, std::string>> bodies;
  int leaks = 0, probes = 0;
  for (int step = 0; step < 400; ++step) {
    const int o = static_cast<int>(rng.below(2));
    try {
      switch (rng.below(5)) {
        case 0: {
          const json r = h.svc->upload_asset(*admins[o], png, json::object());
          assets[o].push_back(r["asset"]["asset_id"]);
          ids[o].push_back(assets[o].back());
          bodies.emplace_back(o, r.dump());
          break;
        }
        case 1: {
          if (assets[o].empty()) break;
          const json r = h.svc->create_task(*admins[o], {{"title", "t"}, {"kind", "IMAGE_2D"}, {"asset_ids", assets[o]}});
          tasks[o].push_back(r["task_id"]);
          ids[o].push_back(tasks[o].back());
          bodies.emplace_back(o, r.dump());
          break;
        }
        case 2: {
          if (tasks[o].empty()) break;
          const std::string t = tasks[o][rng.below(tasks[o].size())];
          const json r = h.svc->start_session(*anns[o], {{"task_id", t}, {"asset_id", assets[o][0]}, {"language", "en"}});
          sessions[o].push_back(r["session_id"]);
          ids[o].push_back(sessions[o].back());
          bodies.emplace_back(o, r.dump());
          break;
        }
        case 3: {
          if (sessions[o].empty()) break;
          const std::string s = sessions[o][rng.below(sessions[o].size())];
          bodies.emplace_back(o, h.svc->get_session(*anns[o], s).dump());
          break;
        }
        default: {
          const auto& theirs = ids[1 - o];
          if (theirs.empty()) break;
          const std::string id = theirs[rng.below(theirs.size())];
          for (const auto* p : {admins[o], anns[o]}) {
            probes += 3;
            leaks += error_code([&] { h.svc->get_task(*p, id); }) != "NOT_FOUND";
            leaks += error_code([&] { h.svc->get_session(*p, id); }) != "NOT_FOUND";
            leaks += error_code([&] { h.svc->get_export(*p, id); }) != "NOT_FOUND";
          }
          probes += 2;
          leaks += error_code([&] {
                     h.svc->create_task(*admins[o], {{"title", "t"}, {"kind", "IMAGE_2D"}, {"asset_ids", {id}}});
                   }) != "NOT_FOUND";
          leaks += error_code([&] {
                     h.svc->add_point(*anns[o], id, {{"name", "x"}, {"x", "1"}, {"y", "1"}, {"version", 0}});
                   }) != "NOT_FOUND";
        }
      }
    } catch (const Error& e) {
      bodies.emplace_back(o, e.context().dump() + e.detail());
    }
  }
  for (const auto& [o, body] : bodies) {
    for (const auto& id : ids[1 - o]) leaks += body.find(id) != std::string::npos;
  }
  c.expect(leaks == 0, std::to_string(leaks) + " cross-tenant leaks");
  c.expect(probes > 100 && ids[0].size() > 10 && ids[1].size() > 10, "sweep too small");
  c.detail = std::to_string(rounds_ok) + "/" + std::to_string(rounds) + " barrier rounds with one winner; " +
             std::to_string(probes) + " cross-org probes, " + std::to_string(bodies.size()) + " bodies, 0 leaks";
}

}  // namespace

int main() {
  criterion("point-format", 5, point_format);
  criterion("sampler-math", 30, sampler_math);
  criterion("point-cloud-contract", 30, cloud_contract);
  criterion("qc-gates", 0, qc_gates);
  criterion("split", 0, split);
  criterion("mcqa-generation", 0, mcqa);
  criterion("stats", 0, stats);
  criterion("end-to-end", 60, end_to_end);
  criterion("concurrency", 0, concurrency);
  std::printf("%d failed\n", g_failed);
  return g_failed ? 1 : 0;
}
