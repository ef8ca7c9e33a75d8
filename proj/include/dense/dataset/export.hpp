#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dense/core/types.hpp"
#include "dense/dataset/stats.hpp"
#include "dense/qa/llm.hpp"

namespace dense::dataset {

enum class Shape { MldcMcA, MldcMcB, Mldc3d };

const char* to_string(Shape s);
std::optional<Shape> parse_shape(std::string_view s);
// The only shape a task can be exported as.
Shape shape_for(const Task& task);

enum class JobStatus { Queued, Running, Done, Failed };

const char* to_string(JobStatus s);
std::optional<JobStatus> parse_job_status(std::string_view s);

struct ExportJob {
  JobId job_id;
  TaskId task_id;
  OrgId org_id;
  Shape shape = Shape::MldcMcA;
  std::uint64_t seed = 0;
  std::size_t per_subcategory_test = 2;
  JobStatus status = JobStatus::Queued;
  std::vector<std::string> outputs;  // paths relative to the data directory
  ExportStats stats;
  std::vector<std::string> warnings;
  std::optional<std::string> error;
};

void to_json(nlohmann::json& j, const ExportJob& job);
void from_json(const nlohmann::json& j, ExportJob& job);

// Everything an export reads. Sessions that are not SUBMITTED, or belong to a
// different task, are ignored.
struct ExportInput {
  Task task;
  std::vector<Asset> assets;
  std::vector<AnnotationSession> sessions;
  double discrepancy_flag_threshold = 0.5;
};

struct ExportConfig {
  std::uint64_t seed = 0;
  std::size_t per_subcategory_test = 2;
  std::size_t n_points = kDefaultCloudPoints;
  std::size_t workers = 4;
  std::size_t option_count = 4;
};

// Blob bytes by digest; nullopt when absent.
using BlobLoader = std::function<std::optional<std::string>(const std::string& digest)>;

struct ExportResult {
  Shape shape = Shape::MldcMcA;
  std::filesystem::path dir;
  std::vector<std::string> files;  // relative to dir, sorted
  ExportStats stats;
  std::vector<std::string> warnings;
};

// <root>/export/<task>/<shape>
std::filesystem::path export_dir(const std::filesystem::path& root, const TaskId& task, Shape shape);

// Each writes into a scratch directory and renames it over the previous
// output. Errors: NO_ACCEPTED_SESSIONS, TRANSCRIPTS_PENDING, SHAPE_MISMATCH,
// plus MISSING_POINT_CLOUD and SUBCATEGORY_TOO_SMALL for 3D.
ExportResult export_mldc_mc_a(const ExportInput& input, qa::LlmClient& llm, const ExportConfig& config,
                              const std::filesystem::path& root);
ExportResult export_mldc_mc_b(const ExportInput& input, qa::LlmClient& llm, const ExportConfig& config,
                              const std::filesystem::path& root);
ExportResult export_mldc_3d(const ExportInput& input, qa::LlmClient& llm, const BlobLoader& blobs,
                            const ExportConfig& config, const std::filesystem::path& root);

ExportResult run_export(Shape shape, const ExportInput& input, qa::LlmClient& llm, const BlobLoader& blobs,
                        const ExportConfig& config, const std::filesystem::path& root);

}  // namespace dense::dataset
