#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "anomdiff/metrics.hpp"
#include "anomdiff/render.hpp"
#include "anomdiff/segment.hpp"
#include "anomdiff/types.hpp"

namespace anomdiff {

// FNV-1a over raw bytes.
std::uint64_t fnv1a64(const void* data, std::size_t size);

// 16-hex-digit FNV-1a digest.
std::string checksum_hex(const std::string& bytes);
std::string checksum_file(const std::string& path);

// Tensor container format: one-line JSON shape header (newline terminated)
// followed by the row-major float64 payload, native little-endian.
void write_fov_tensor(const std::string& path, const FovTensor& tensor);
FovTensor read_fov_tensor(const std::string& path);

// Writes frame_%04d.pgm plus index.json (fov_id, geometry, render config
// echo, per-frame checksums) into dir, creating directories as needed.
void write_frame_stack(const std::string& dir, const FrameStack& stack,
                       int fov_id, const RenderConfig& render);

// Reads the PGM frames listed in dir/index.json back into a stack.
FrameStack read_frame_stack(const std::string& dir);

std::string ensemble_to_json(const EnsembleSummary& summary);

// (name, hex digest) pairs for the files a stage consumed.
using InputChecksums = std::vector<std::pair<std::string, std::string>>;

struct ExperimentReport {
  std::string name;
  EvaluationReport report;
};

// report.json body: resolved config echo, input checksums, one block per
// experiment, combined summary. config_json must be a JSON object ("" is
// treated as {}).
std::string report_to_json(const std::vector<ExperimentReport>& experiments,
                           const EvaluationReport& combined,
                           const std::string& config_json,
                           const InputChecksums& inputs);

// report.csv: one row per experiment, columns
// exp,n_trajs,rmse_cp,jsc_cp,alpha_mae,k_msle,state_f1,alpha_w1,k_w1.
std::string report_to_csv(const std::vector<ExperimentReport>& experiments);

}  // namespace anomdiff
