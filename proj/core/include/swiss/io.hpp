#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "swiss/combiners.hpp"
#include "swiss/metrics.hpp"
#include "swiss/moments.hpp"
#include "swiss/sampler.hpp"
#include "swiss/targets.hpp"

namespace swiss::io {

namespace fs = std::filesystem;

/// Shortest decimal text that round-trips to the same double (≤ 17 digits).
std::string format_double(double v);

// Sample matrices: header param_0..param_{d-1}, one draw per row.
void write_samples_csv(const fs::path& path, const Matrix& draws);
Matrix read_samples_csv(const fs::path& path);

/// "dir/batch_3.csv" → "dir/batch_3.meta.json".
fs::path meta_path_for(const fs::path& csv_path);

struct BatchFileMeta {
  int batch_id = 0;
  long samples = 0;
  long dim = 0;
  BatchMeta meta;
  std::optional<SamplerDiagnostics> diagnostics;
};

void write_batch_meta(const fs::path& path, const BatchFileMeta& meta);
BatchFileMeta read_batch_meta(const fs::path& path);

/// Writes draws plus the .meta.json sidecar.
void write_batch(const fs::path& csv_path, const SampleBatch& batch,
                 const std::optional<SamplerDiagnostics>& diagnostics = {});
/// Reads draws and, if present, the sidecar. Without a sidecar the batch id
/// is `fallback_id`.
SampleBatch read_batch(const fs::path& csv_path, int fallback_id);

// Datasets: header x0..x{p-1}, y, optional group.
void write_dataset_csv(const fs::path& path, const Dataset& data);
Dataset read_dataset_csv(const fs::path& path);

// Partitions: header row,batch.
void write_partition_csv(const fs::path& path, const Partition& p);
Partition read_partition_csv(const fs::path& path);

std::string maps_to_json(const CombineResult& result, CombineMethod method);
std::string metrics_to_json(const MetricReport& report);

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

}  // namespace swiss::io
