#include <doctest.h>

#include <atomic>
#include <barrier>
#include <set>
#include <thread>

#include "dense/core/digest.hpp"
#include "dense/core/error.hpp"
#include "dense/core/json.hpp"
#include "dense/core/prompts.hpp"
#include "dense/core/rng.hpp"
#include "dense/service/store.hpp"
#include "support/files.hpp"
#include "support/glb_builder.hpp"
#include "support/harness.hpp"
#include "support/media.hpp"

using namespace dense;
using namespace dense::service;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <class F>
std::string error_code(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

json scene_meta() {
  return {{"kind", "SCENE_3D"},
          {"scene_meta", {{"category", "Home"}, {"subcategory", "Bedroom"}, {"site", "INDOOR"}}},
          {"objects", {{{"name", "lamp"}}, {{"name", "bed"}}, {{"name", "desk"}}}}};
}

std::string png() { return testglb::encode_png(2, 2, std::vector<std::uint8_t>(16, 200)); }

struct Setup2d {
  std::string asset_id, task_id, session_id;
};

Setup2d setup_2d(testsvc::Harness& h, PromptProfile profile = PromptProfile::PartB) {
  Setup2d s;
  s.asset_id = h.svc->upload_asset(h.admin_a(), png(), json::object())["asset"]["asset_id"];
  s.task_id = h.svc->create_task(h.admin_a(), {{"title", "t"}, {"kind", "IMAGE_2D"},
                                               {"prompt_profile", profile},
                                               {"asset_ids", {s.asset_id}}})["task_id"];
  s.session_id = h.svc->start_session(h.ann_a1(), {{"task_id", s.task_id}, {"asset_id", s.asset_id}, {"language", "en"}})
                     ["session_id"];
  return s;
}

std::int64_t version(testsvc::Harness& h, const std::string& sid) {
  return h.svc->get_session(h.ann_a1(), sid)["version"].get<std::int64_t>();
}

json point(const std::string& name, const std::string& x, const std::string& y, std::int64_t v) {
  return {{"name", name}, {"x", x}, {"y", y}, {"version", v}};
}

void drain(testsvc::Harness& h) {
  while (h.svc->run_one_job()) {
  }
}

}  // namespace

TEST_CASE("tasks and assets") {
  testsvc::Harness h("tasks");
  const json up = h.svc->upload_asset(h.admin_a(), testfiles::fixture("scene_basic.glb"), scene_meta());
  CHECK(up["blob"]["kind"] == "GLB");
  CHECK(up["blob"]["digest"] == sha256_hex(testfiles::fixture("scene_basic.glb")));
  CHECK(up["asset"]["objects"].size() == 3);
  CHECK(up["asset"]["objects"][0]["node_path"] == "lamp");
  const std::string asset_id = up["asset"]["asset_id"];

  const json task = h.svc->create_task(h.admin_a(), {{"title", "t"}, {"kind", "SCENE_3D"}, {"asset_ids", {asset_id}},
                                                     {"policy", {{"discrepancy_flag_threshold", 0.3}}}});
  CHECK(task["questions"] == json(prompts::defaults_for(PromptProfile::Scene)));
  CHECK(task["questions"].size() == 9);
  CHECK(task["policy"]["discrepancy_flag_threshold"] == 0.3);
  CHECK(task["policy"]["min_object_recording_s"] == 20.0);
  CHECK(task["created_at"] == "2026-01-01T00:00:00Z");
  CHECK(h.svc->get_task(h.ann_a1(), task["task_id"])["task_id"] == task["task_id"]);

  CHECK(error_code([&] { h.svc->create_task(h.ann_a1(), {{"kind", "SCENE_3D"}}); }) == "FORBIDDEN");
  CHECK(error_code([&] { h.svc->get_task(h.admin_b(), task["task_id"]); }) == "NOT_FOUND");
  CHECK(error_code([&] {
          h.svc->create_task(h.admin_b(), {{"title", "t"}, {"kind", "SCENE_3D"}, {"asset_ids", {asset_id}}});
        }) == "NOT_FOUND");
  CHECK(error_code([&] { h.svc->create_task(h.admin_a(), {{"title", "t"}, {"kind", "IMAGE_2D"}, {"asset_ids", {asset_id}}}); }) ==
        "WRONG_ASSET_KIND");
  CHECK(error_code([&] {
          h.svc->create_task(h.admin_a(), {{"title", "t"}, {"kind", "SCENE_3D"}, {"policy", {{"max_recording_s", -1.0}}}});
        }) != "");

  json bad_node = scene_meta();
  bad_node["objects"].push_back({{"name", "sofa"}, {"node_path", "sofa"}});
  CHECK(error_code([&] { h.svc->upload_asset(h.admin_a(), testfiles::fixture("scene_basic.glb"), bad_node); }) ==
        "OBJECT_NOT_FOUND");
  CHECK(error_code([&] { h.svc->upload_asset(h.admin_a(), "not media", json::object()); }) == "UNSUPPORTED_MEDIA");
  CHECK(error_code([&] { h.svc->upload_asset(h.admin_a(), "\x89PNG\r\n\x1a\ntruncated", json::object()); }) ==
        "INVALID_IMAGE");
  CHECK(error_code([&] { h.svc->upload_asset(h.admin_a(), "glTFbroken", scene_meta()); }) != "");
  CHECK(error_code([&] { h.svc->upload_asset(h.admin_a(), png(), {{"kind", "SCENE_3D"}}); }) == "WRONG_ASSET_KIND");
  CHECK(error_code([&] { h.svc->upload_asset(h.ann_a1(), png(), json::object()); }) == "FORBIDDEN");
  CHECK(h.svc->upload_asset(h.admin_a(), png(), json::object())["asset"]["kind"] == "IMAGE_2D");

  SUBCASE("assignment restricts who may start") {
    const std::string tid = task["task_id"];
    const json assigned = h.svc->assign(h.admin_a(), tid, {{"annotators", {"ann-a2"}}});
    CHECK(assigned["annotators"] == json::array({"ann-a2"}));
    CHECK(error_code([&] {
            h.svc->start_session(h.ann_a1(), {{"task_id", tid}, {"asset_id", asset_id}, {"language", "en"}});
          }) == "FORBIDDEN");
    CHECK(h.svc->start_session(h.ann_a2(), {{"task_id", tid}, {"asset_id", asset_id}, {"language", "en"}})["stage"] ==
          "OBJECTS");
    CHECK(error_code([&] {
            h.svc->start_session(h.ann_b1(), {{"task_id", tid}, {"asset_id", asset_id}, {"language", "en"}});
          }) == "NOT_FOUND");
    CHECK(error_code([&] { h.svc->assign(h.ann_a2(), tid, {{"annotators", {"ann-a1"}}}); }) == "FORBIDDEN");
  }
}

TEST_CASE("2D session through the service") {
  testsvc::Harness h("session2d");
  const auto s = setup_2d(h);
  const std::string sid = s.session_id;

  for (int i = 0; i < 4; ++i) {
    h.svc->add_point(h.ann_a1(), sid, point("p" + std::to_string(i), "10.5", "20", version(h, sid)));
  }
  const std::string audio = testmedia::wav(61.0, 8000);
  h.stt->set(sha256_hex(audio), "A table with food.");
  const json rec = h.svc->add_recording(h.ann_a1(), sid, audio, "scene", version(h, sid));
  CHECK(rec["recording"]["duration_s"].get<double>() == doctest::Approx(61.0));
  CHECK(!rec["recording"].contains("auto_transcript"));
  CHECK(h.svc->blobs().contains(sha256_hex(audio)));

  try {
    h.svc->submit(h.ann_a1(), sid, {{"version", version(h, sid)}});
    FAIL("expected rejection");
  } catch (const Error& e) {
    CHECK(e.code() == "MIN_POINTS");
    CHECK(e.context()["accepted"] == false);
  }

  drain(h);
  json session = h.svc->get_session(h.ann_a1(), sid);
  CHECK(session["recordings"][0]["auto_transcript"] == "A table with food.");
  CHECK(session["points"][0]["x"] == "10.50");

  const std::string rid = rec["recording"]["recording_id"];
  session = h.svc->edit_transcript(h.ann_a1(), sid, rid, {{"text", "A table with noodles."}, {"version", version(h, sid)}});
  CHECK(session["recordings"][0]["edited_transcript"] == "A table with noodles.");
  CHECK(session["recordings"][0]["auto_transcript"] == "A table with food.");
  CHECK(session["recordings"][0]["discrepancy"].get<double>() > 0.0);

  SUBCASE("conflicts and permissions") {
    const auto v = version(h, sid);
    h.svc->add_point(h.ann_a1(), sid, point("p4", "1", "1", v));
    try {
      h.svc->add_point(h.ann_a1(), sid, point("p5", "1", "1", v));
      FAIL("expected conflict");
    } catch (const Error& e) {
      CHECK(e.code() == "CONFLICT");
      CHECK(e.context()["current_version"] == v + 1);
    }
    CHECK(error_code([&] { h.svc->add_point(h.ann_a2(), sid, point("x", "1", "1", v + 1)); }) == "FORBIDDEN");
    CHECK(error_code([&] { h.svc->get_session(h.ann_a2(), sid); }) == "FORBIDDEN");
    CHECK(h.svc->get_session(h.admin_a(), sid)["session_id"] == sid);
    CHECK(error_code([&] { h.svc->add_point(h.admin_a(), sid, point("x", "1", "1", v + 1)); }) == "FORBIDDEN");
    CHECK(error_code([&] { h.svc->get_session(h.ann_b1(), sid); }) == "NOT_FOUND");
    CHECK(error_code([&] { h.svc->add_point(h.ann_a1(), sid, {{"name", "x"}, {"x", "1"}, {"y", "1"}}); }) ==
          "BAD_REQUEST");
    CHECK(error_code([&] { h.svc->add_point(h.ann_a1(), sid, point("x", "1e2", "1", v + 1)); }) == "BAD_REQUEST");
  }
  SUBCASE("audio checks") {
    CHECK(error_code([&] { h.svc->add_recording(h.ann_a1(), sid, "OggS....", "scene", version(h, sid)); }) ==
          "UNSUPPORTED_MEDIA");
    CHECK(error_code([&] {
            h.svc->add_recording(h.ann_a1(), sid, testmedia::webm(10, {.codec = "A_VORBIS"}), "scene", version(h, sid));
          }) == "UNSUPPORTED_MEDIA");
    CHECK(error_code([&] { h.svc->add_recording(h.ann_a1(), sid, testmedia::wav(186.0, 1000), "scene", version(h, sid)); }) ==
          "DURATION_EXCEEDED");
    const json webm = h.svc->add_recording(h.ann_a1(), sid, testmedia::webm(3050), "scene", version(h, sid));
    CHECK(webm["recording"]["duration_s"].get<double>() == doctest::Approx(61.0));
  }
  SUBCASE("accepted submit and immutability") {
    h.svc->add_point(h.ann_a1(), sid, point("p4", "65.2", "63.9", version(h, sid)));
    const json done = h.svc->submit(h.ann_a1(), sid, {{"version", version(h, sid)}});
    CHECK(done["session"]["stage"] == "SUBMITTED");
    CHECK(done["report"]["accepted"] == true);
    CHECK(error_code([&] { h.svc->add_point(h.ann_a1(), sid, point("p5", "1", "1", version(h, sid))); }) ==
          "SESSION_IMMUTABLE");
  }
}

TEST_CASE("compare-and-set admits exactly one writer") {
  testsvc::Harness h("cas");
  const auto s = setup_2d(h);
  for (int round = 0; round < 40; ++round) {
    const auto v = version(h, s.session_id);
    std::barrier sync(2);
    std::atomic<int> ok{0}, conflict{0};
    auto writer = [&](int id) {
      sync.arrive_and_wait();
      try {
        h.svc->add_point(h.ann_a1(), s.session_id, point("w" + std::to_string(id), "5", "5", v));
        ++ok;
      } catch (const Error& e) {
        if (e.code() == "CONFLICT") ++conflict;
      }
    };
    std::thread a(writer, 0), b(writer, 1);
    a.join();
    b.join();
    CHECK(ok == 1);
    CHECK(conflict == 1);
    CHECK(version(h, s.session_id) == v + 1);
  }
  CHECK(h.svc->get_session(h.ann_a1(), s.session_id)["points"].size() == 40);
}

TEST_CASE("org isolation sweep") {
  testsvc::Harness h("isolation");
  Rng rng(2024);
  struct Org {
    const Principal* admin;
    const Principal* annotator;
    std::vector<std::string> assets, tasks, sessions;
    std::set<std::string> created;
  };
  std::array<Org, 2> orgs = {Org{&h.admin_a(), &h.ann_a1(), {}, {}, {}, {}},
                             Org{&h.admin_b(), &h.ann_b1(), {}, {}, {}, {}}};
  std::vector<std::pair<int, std::string>> transcript;  // (org, response dump)

  auto record = [&](int o, const json& r) { transcript.emplace_back(o, r.dump()); };
  for (int step = 0; step < 300; ++step) {
    const int o = static_cast<int>(rng.below(2));
    Org& me = orgs[o];
    Org& other = orgs[1 - o];
    try {
      switch (rng.below(7)) {
        case 0: {
          const json r = h.svc->upload_asset(*me.admin, png(), json::object());
          me.assets.push_back(r["asset"]["asset_id"]);
          me.created.insert(me.assets.back());
          record(o, r);
          break;
        }
        case 1: {
          if (me.assets.empty()) break;
          const json r = h.svc->create_task(*me.admin, {{"title", "t"}, {"kind", "IMAGE_2D"}, {"asset_ids", me.assets}});
          me.tasks.push_back(r["task_id"]);
          me.created.insert(me.tasks.back());
          record(o, r);
          break;
        }
        case 2: {
          if (me.tasks.empty()) break;
          const std::string t = me.tasks[rng.below(me.tasks.size())];
          const json task = h.svc->get_task(*me.annotator, t);
          record(o, task);
          const json r = h.svc->start_session(*me.annotator,
                                              {{"task_id", t}, {"asset_id", task["asset_ids"][0]}, {"language", "en"}});
          me.sessions.push_back(r["session_id"]);
          me.created.insert(me.sessions.back());
          record(o, r);
          break;
        }
        case 3: {
          if (me.sessions.empty()) break;
          const std::string sid = me.sessions[rng.below(me.sessions.size())];
          const auto v = h.svc->get_session(*me.annotator, sid)["version"].get<std::int64_t>();
          record(o, h.svc->add_point(*me.annotator, sid, point("p", "1", "2", v)));
          break;
        }
        case 4: {
          // Probe the other org's ids with every read and write path.
          std::vector<std::string> ids(other.created.begin(), other.created.end());
          if (ids.empty()) break;
          const std::string id = ids[rng.below(ids.size())];
          for (auto* p : {me.admin, me.annotator}) {
            CHECK(error_code([&] { h.svc->get_task(*p, id); }) == "NOT_FOUND");
            CHECK(error_code([&] { h.svc->get_session(*p, id); }) == "NOT_FOUND");
            CHECK(error_code([&] { h.svc->get_export(*p, id); }) == "NOT_FOUND");
          }
          CHECK(error_code([&] { h.svc->add_point(*me.annotator, id, point("x", "1", "1", 0)); }) == "NOT_FOUND");
          CHECK(error_code([&] { h.svc->assign(*me.admin, id, {{"annotators", {"x"}}}); }) == "NOT_FOUND");
          CHECK(error_code([&] { h.svc->create_export(*me.admin, {{"task_id", id}}); }) == "NOT_FOUND");
          CHECK(error_code([&] { h.svc->create_task(*me.admin, {{"title", "t"}, {"kind", "IMAGE_2D"}, {"asset_ids", {id}}}); }) ==
                "NOT_FOUND");
          break;
        }
        case 5: {
          if (me.tasks.empty()) break;
          const json r = h.svc->create_export(*me.admin, {{"task_id", me.tasks.back()}});
          me.created.insert(r["job_id"]);
          record(o, r);
          record(o, h.svc->get_export(*me.admin, r["job_id"]));
          break;
        }
        default: {
          if (me.tasks.empty()) break;
          record(o, h.svc->get_task(*me.admin, me.tasks[rng.below(me.tasks.size())]));
        }
      }
    } catch (const Error& e) {
      record(o, json{{"code", e.code()}, {"detail", e.detail()}, {"context", e.context()}});
    }
  }
  drain(h);
  for (int o = 0; o < 2; ++o) {
    for (const auto& id : orgs[1 - o].created) {
      for (const auto& [who, body] : transcript) {
        if (who == o) CHECK_MESSAGE(body.find(id) == std::string::npos, "org ", o, " saw ", id);
      }
    }
  }
  CHECK(orgs[0].created.size() > 10);
  CHECK(orgs[1].created.size() > 10);
}

TEST_CASE("transcription jobs") {
  testsvc::Harness h("transcribe");
  const auto s = setup_2d(h);
  const std::string audio = testmedia::wav(61.0, 8000);
  h.stt->set(sha256_hex(audio), "hello");

  SUBCASE("retryable failures back off and then succeed") {
    h.stt->fail_next(2, true);
    h.svc->add_recording(h.ann_a1(), s.session_id, audio, "scene", version(h, s.session_id));
    CHECK(h.svc->wait_idle(std::chrono::seconds(10)));
    CHECK(h.stt->calls() == 3);
    CHECK(h.svc->get_session(h.ann_a1(), s.session_id)["recordings"][0]["auto_transcript"] == "hello");
  }
  SUBCASE("permanent failure leaves the transcript pending") {
    h.stt->fail_next(1, false);
    h.svc->add_recording(h.ann_a1(), s.session_id, audio, "scene", version(h, s.session_id));
    CHECK(h.svc->wait_idle(std::chrono::seconds(10)));
    CHECK(!h.svc->get_session(h.ann_a1(), s.session_id)["recordings"][0].contains("auto_transcript"));
    CHECK(h.svc->store().pending_jobs() == 0);
  }
  SUBCASE("callback after submission fills the transcript without changing stage") {
    for (int i = 0; i < 5; ++i) h.svc->add_point(h.ann_a1(), s.session_id, point("p", "1", "1", version(h, s.session_id)));
    h.svc->add_recording(h.ann_a1(), s.session_id, audio, "scene", version(h, s.session_id));
    h.svc->submit(h.ann_a1(), s.session_id, {{"version", version(h, s.session_id)}});
    drain(h);
    const json after = h.svc->get_session(h.ann_a1(), s.session_id);
    CHECK(after["stage"] == "SUBMITTED");
    CHECK(after["recordings"][0]["auto_transcript"] == "hello");
  }
  SUBCASE("every recording references a stored blob") {
    for (int i = 0; i < 3; ++i) {
      h.svc->add_recording(h.ann_a1(), s.session_id, testmedia::wav(61.0 + i, 8000), "scene", version(h, s.session_id));
    }
    drain(h);
    for (const auto& r : h.svc->get_session(h.ann_a1(), s.session_id)["recordings"]) {
      const std::string ref = r["audio_ref"];
      CHECK(h.svc->store().blob(ref).has_value());
      CHECK(h.svc->blobs().get(ref).has_value());
    }
  }
}

namespace {

struct Scene3d {
  std::string task_id;
  std::string session_id;
};

Scene3d annotate_scene(testsvc::Harness& h) {
  const json up = h.svc->upload_asset(h.admin_a(), testfiles::fixture("scene_basic.glb"), scene_meta());
  const std::string asset_id = up["asset"]["asset_id"];
  Scene3d out;
  out.task_id = h.svc->create_task(h.admin_a(), {{"title", "t"}, {"kind", "SCENE_3D"}, {"asset_ids", {asset_id}}})["task_id"];
  out.session_id =
      h.svc->start_session(h.ann_a1(), {{"task_id", out.task_id}, {"asset_id", asset_id}, {"language", "en"}})
          ["session_id"];
  const auto& sid = out.session_id;
  // Background transcription bumps the version between read and write.
  auto retry = [&](auto&& op) {
    for (int attempt = 0;; ++attempt) {
      try {
        return op(version(h, sid));
      } catch (const Error& e) {
        if (e.code() != "CONFLICT" || attempt == 50) throw;
      }
    }
  };
  double secs = 21.0;
  for (const auto& o : up["asset"]["objects"]) {
    const std::string audio = testmedia::wav(secs++, 8000);
    retry([&](std::int64_t v) { return h.svc->add_recording(h.ann_a1(), sid, audio, o["object_id"], v); });
  }
  retry([&](std::int64_t v) { return h.svc->unlock_scene(h.ann_a1(), sid, {{"version", v}}); });
  retry([&](std::int64_t v) { return h.svc->add_recording(h.ann_a1(), sid, testmedia::wav(70.0, 8000), "scene", v); });
  retry([&](std::int64_t v) { return h.svc->submit(h.ann_a1(), sid, {{"version", v}}); });
  return out;
}

std::map<std::string, std::string> read_outputs(testsvc::Harness& h, const json& job) {
  std::map<std::string, std::string> files;
  for (const auto& rel : job["outputs"]) {
    files[rel.get<std::string>()] = testfiles::read((h.dir / rel.get<std::string>()).string());
  }
  return files;
}

}  // namespace

TEST_CASE("export jobs") {
  testsvc::Harness h("exports");
  const auto scene = annotate_scene(h);

  const json job = h.svc->create_export(h.admin_a(), {{"task_id", scene.task_id}, {"seed", 3}, {"per_subcategory_test", 1}});
  CHECK(job["status"] == "QUEUED");
  CHECK(job["shape"] == "mldc_3d");
  // Transcription jobs are still queued ahead of the export.
  CHECK(h.svc->store().pending_jobs("transcribe") == 4);
  drain(h);
  const json done = h.svc->get_export(h.admin_a(), job["job_id"]);
  REQUIRE(done["status"] == "DONE");
  CHECK(done["stats"]["en"]["annotation_count"] == 1);
  const auto files = read_outputs(h, done);
  CHECK(files.size() == done["outputs"].size());
  bool cloud = false;
  for (const auto& [path, bytes] : files) {
    if (path.find("/clouds/") != std::string::npos) {
      cloud = true;
      CHECK(bytes.size() == 128 + 8192 * 24);
    }
  }
  CHECK(cloud);

  SUBCASE("a second job on unchanged inputs writes identical bytes") {
    const json again = h.svc->create_export(h.admin_a(), {{"task_id", scene.task_id}, {"seed", 3}, {"per_subcategory_test", 1}});
    drain(h);
    CHECK(read_outputs(h, h.svc->get_export(h.admin_a(), again["job_id"])) == files);
  }
  SUBCASE("restart mid-export resumes to identical bytes") {
    const json again = h.svc->create_export(h.admin_a(), {{"task_id", scene.task_id}, {"seed", 3}, {"per_subcategory_test", 1}});
    // Crash: the job is leased and half-written when the process dies.
    REQUIRE(h.svc->store().lease(0, 1'000'000'000'000'000).has_value());
    auto ej = *h.svc->store().export_job(OrgId("org-a"), JobId(again["job_id"]));
    ej.status = dataset::JobStatus::Running;
    h.svc->store().update_export(ej);
    const fs::path out_dir = h.dir / fs::path(done["outputs"][0].get<std::string>()).parent_path();
    fs::create_directories(out_dir.string() + ".partial");
    std::ofstream(out_dir.string() + ".partial/train.jsonl") << "torn";
    fs::remove_all(out_dir);

    h.restart();
    CHECK(h.svc->get_export(h.admin_a(), again["job_id"])["status"] == "QUEUED");
    drain(h);
    const json resumed = h.svc->get_export(h.admin_a(), again["job_id"]);
    REQUIRE(resumed["status"] == "DONE");
    CHECK(read_outputs(h, resumed) == files);
    CHECK(!fs::exists(out_dir.string() + ".partial"));
  }
  SUBCASE("shape and permissions") {
    CHECK(error_code([&] { h.svc->create_export(h.admin_a(), {{"task_id", scene.task_id}, {"shape", "mldc_mc_a"}}); }) ==
          "SHAPE_MISMATCH");
    CHECK(error_code([&] { h.svc->create_export(h.admin_a(), {{"task_id", scene.task_id}, {"shape", "zip"}}); }) ==
          "BAD_REQUEST");
    CHECK(error_code([&] { h.svc->create_export(h.ann_a1(), {{"task_id", scene.task_id}}); }) == "FORBIDDEN");
  }
  SUBCASE("failed preconditions fail the job") {
    const json bad = h.svc->create_export(h.admin_a(), {{"task_id", scene.task_id}, {"per_subcategory_test", 2}});
    drain(h);
    const json failed = h.svc->get_export(h.admin_a(), bad["job_id"]);
    CHECK(failed["status"] == "FAILED");
    CHECK(failed["error"].get<std::string>().rfind("SUBCATEGORY_TOO_SMALL", 0) == 0);
  }
}

TEST_CASE("export waits for outstanding transcripts") {
  testsvc::Harness h("export_wait", true);
  h.stt->fail_next(3, true);
  const auto scene = annotate_scene(h);
  const json job = h.svc->create_export(h.admin_a(), {{"task_id", scene.task_id}, {"per_subcategory_test", 1}});
  CHECK(h.svc->wait_idle(std::chrono::seconds(30)));
  CHECK(h.svc->get_export(h.admin_a(), job["job_id"])["status"] == "DONE");
  for (const auto& r : h.svc->get_session(h.ann_a1(), scene.session_id)["recordings"]) {
    CHECK(r["auto_transcript"].is_string());
  }
}

TEST_CASE("two exports of one task both complete") {
  testsvc::Harness h("export_pair", true);
  h.opts.workers = 3;
  h.restart();
  const auto scene = annotate_scene(h);
  const json a = h.svc->create_export(h.admin_a(), {{"task_id", scene.task_id}, {"seed", 5}, {"per_subcategory_test", 0}});
  const json b = h.svc->create_export(h.admin_a(), {{"task_id", scene.task_id}, {"seed", 5}, {"per_subcategory_test", 0}});
  CHECK(h.svc->wait_idle(std::chrono::seconds(30)));
  const json ja = h.svc->get_export(h.admin_a(), a["job_id"]);
  const json jb = h.svc->get_export(h.admin_a(), b["job_id"]);
  CHECK_MESSAGE(ja["status"] == "DONE", ja.dump());
  CHECK_MESSAGE(jb["status"] == "DONE", jb.dump());
  CHECK(ja["outputs"] == jb["outputs"]);
}

TEST_CASE("store keeps rows per org") {
  const fs::path dir = fs::temp_directory_path() / "dense_store_rows";
  fs::remove_all(dir);
  fs::create_directories(dir);
  {
    Store st((dir / "db.sqlite").string());
    Asset a;
    a.asset_id = AssetId("same-id");
    a.media_ref = "x";
    st.insert_asset(OrgId("o1"), a);
    a.media_ref = "y";
    st.insert_asset(OrgId("o2"), a);
    CHECK(st.asset(OrgId("o1"), AssetId("same-id"))->media_ref == "x");
    CHECK(st.asset(OrgId("o2"), AssetId("same-id"))->media_ref == "y");
    CHECK(!st.asset(OrgId("o3"), AssetId("same-id")).has_value());
    CHECK(error_code([&] { st.insert_asset(OrgId("o1"), a); }) == "STORAGE_UNAVAILABLE");

    st.enqueue(JobId("j1"), "export", {{"n", 1}});
    st.enqueue(JobId("j2"), "export", {{"n", 2}}, 1'000);
    auto first = st.lease(500, 100);
    REQUIRE(first.has_value());
    CHECK(first->job_id == JobId("j1"));
    CHECK(first->attempts == 1);
    CHECK(!st.lease(550, 100).has_value());
    // Lease expired without a heartbeat: re-leased.
    auto again = st.lease(601, 100);
    REQUIRE(again.has_value());
    CHECK(again->job_id == JobId("j1"));
    CHECK(again->attempts == 2);
    st.heartbeat(JobId("j1"), 10'000);
    CHECK(st.lease(1'500, 100)->job_id == JobId("j2"));
    st.finish(JobId("j1"));
    CHECK(st.job_status(JobId("j1")) == "DONE");
    CHECK(st.pending_jobs() == 1);
  }
  {
    Store reopened((dir / "db.sqlite").string());
    CHECK(reopened.asset(OrgId("o1"), AssetId("same-id"))->media_ref == "x");
    reopened.reset_running();
    CHECK(reopened.job_status(JobId("j2")) == "QUEUED");
  }
  CHECK(error_code([&] { Store bad((dir / "missing" / "db.sqlite").string()); }) == "STORAGE_UNAVAILABLE");
  fs::remove_all(dir);
}
