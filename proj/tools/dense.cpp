// dense: serve | export | convert-glb | stats

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "dense/core/error.hpp"
#include "dense/dataset/stats.hpp"
#include "dense/geometry/glb.hpp"
#include "dense/geometry/npy.hpp"
#include "dense/geometry/sampler.hpp"
#include "dense/service/config.hpp"
#include "dense/service/http.hpp"
#include "dense/service/service.hpp"

using namespace dense;
using nlohmann::json;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("IO_ERROR", "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

service::HttpServer* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server) g_server->stop();
}

int cmd_serve() {
  const auto cfg = service::config_from_env(service::process_env());
  service::Service svc(service::make_options(cfg));
  service::HttpServer http(svc);
  const int port = http.bind(cfg.host, cfg.port);
  if (port < 0) throw Error("IO_ERROR", "cannot listen on " + cfg.host + ":" + std::to_string(cfg.port));
  g_server = &http;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::fprintf(stderr, "listening on %s:%d (data %s%s)\n", cfg.host.c_str(), port, cfg.data_dir.c_str(),
               cfg.mock_clients ? ", mock clients" : "");
  http.serve();
  g_server = nullptr;
  return 0;
}

// Runs an export job to completion in-process against the data directory.
int cmd_export(const std::string& token, const json& request) {
  const auto cfg = service::config_from_env(service::process_env());
  auto opts = service::make_options(cfg);
  opts.start_workers = false;
  service::Service svc(std::move(opts));
  const service::Principal* who = svc.authenticate("Bearer " + token);
  if (!who) throw Error("UNAUTHENTICATED", "unknown token");
  const json job = svc.create_export(*who, request);
  while (svc.run_one_job()) {
  }
  const json done = svc.get_export(*who, job["job_id"]);
  std::cout << done.dump(2) << "\n";
  return done["status"] == "DONE" ? 0 : 1;
}

int cmd_convert(const std::string& in, const std::string& out, std::size_t n, std::uint64_t seed,
                const std::string& node) {
  auto meshes = geometry::parse_glb(slurp(in));
  if (!node.empty()) meshes = geometry::isolate_object(meshes, node);
  geometry::SamplerConfig sc;
  sc.n_points = n;
  sc.seed = seed;
  const PointCloud cloud = geometry::sample_scene(meshes, sc);
  std::ofstream f(out, std::ios::binary);
  if (!f) throw Error("IO_ERROR", "cannot write " + out);
  const std::size_t bytes = geometry::write_npy(cloud, f);
  std::fprintf(stderr, "%zu points, %zu bytes -> %s\n", cloud.n, bytes, out.c_str());
  return 0;
}

// Captions from export records: 2D records carry language/caption, 3D samples
// carry the caption as the answer of the detailed description.
void collect(const json& rec, std::vector<Caption>& out) {
  if (rec.contains("caption") && rec.contains("language")) {
    out.push_back({AssetId(), rec["language"], rec["caption"], CaptionSource::RawTranscript, {}});
    return;
  }
  if (rec.value("conversation_type", "") != "detailed_description") return;
  std::string id = rec["sample_id"];
  const std::string suffix = "_description";
  if (id.size() <= suffix.size()) return;
  id.resize(id.size() - suffix.size());
  const auto cut = id.rfind('_');
  if (cut == std::string::npos) return;
  out.push_back({AssetId(), id.substr(cut + 1), rec["conversations"][1]["value"], CaptionSource::Summarized, {}});
}

int cmd_stats(const std::vector<std::string>& files) {
  std::vector<Caption> captions;
  for (const auto& path : files) {
    std::istringstream lines(slurp(path));
    for (std::string line; std::getline(lines, line);) {
      if (!line.empty()) collect(json::parse(line), captions);
    }
  }
  std::cout << dataset::render_stats(dataset::compute_stats(captions));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dense captioning annotation service"};
  app.require_subcommand(1);

  app.add_subcommand("serve", "run the HTTP API (configured from the environment)");

  auto* ex = app.add_subcommand("export", "build a dataset export for a task");
  std::string token, task, shape;
  std::uint64_t seed = 0;
  int per_sub = 2;
  ex->add_option("--token", token, "admin bearer token")->required();
  ex->add_option("--task", task, "task id")->required();
  ex->add_option("--shape", shape, "mldc_mc_a | mldc_mc_b | mldc_3d");
  ex->add_option("--seed", seed, "export seed");
  ex->add_option("--test-per-subcategory", per_sub, "3D test scenes per subcategory");

  auto* cv = app.add_subcommand("convert-glb", "sample a GLB scene into an (N,6) .npy cloud");
  std::string in, out, node;
  std::size_t n = kDefaultCloudPoints;
  std::uint64_t cseed = 0;
  cv->add_option("input", in)->required();
  cv->add_option("output", out)->required();
  cv->add_option("-n,--points", n, "points to sample");
  cv->add_option("--seed", cseed);
  cv->add_option("--node", node, "only this node path");

  auto* st = app.add_subcommand("stats", "per-language caption statistics of export records");
  std::vector<std::string> files;
  st->add_option("files", files, ".jsonl record files")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (app.got_subcommand("serve")) return cmd_serve();
    if (app.got_subcommand("export")) {
      json req = {{"task_id", task}, {"seed", seed}, {"per_subcategory_test", per_sub}};
      if (!shape.empty()) req["shape"] = shape;
      return cmd_export(token, req);
    }
    if (app.got_subcommand("convert-glb")) return cmd_convert(in, out, n, cseed, node);
    return cmd_stats(files);
  } catch (const Error& e) {
    std::fprintf(stderr, "%s: %s\n", e.code().c_str(), e.detail().c_str());
    if (!e.context().is_null()) std::fprintf(stderr, "%s\n", e.context().dump().c_str());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
