#include "swiss/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "swiss/error.hpp"

namespace swiss::io {

using json = nlohmann::json;

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    while (!field.empty() && (field.back() == ' ' || field.back() == '\r')) field.pop_back();
    std::size_t start = 0;
    while (start < field.size() && field[start] == ' ') ++start;
    out.push_back(field.substr(start));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, const std::string& source, long line) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ParseError(source, line, "expected a number, got '" + text + "'");
  if (!std::isfinite(v)) throw ParseError(source, line, "non-finite value '" + text + "'");
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<long> line_numbers;
};

CsvTable read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  CsvTable t;
  std::string line;
  long line_no = 0;
  const std::string source = path.string();
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_commas(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw ParseError(source, line_no,
                       "expected " + std::to_string(t.header.size()) + " fields, got " +
                           std::to_string(fields.size()));
    t.rows.push_back(std::move(fields));
    t.line_numbers.push_back(line_no);
  }
  if (t.header.empty()) throw ParseError(source, 1, "missing header row");
  return t;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  return out;
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
    rows.push_back(std::move(r));
  }
  return rows;
}

json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

void write_samples_csv(const fs::path& path, const Matrix& draws) {
  std::ofstream out = open_out(path);
  for (Eigen::Index j = 0; j < draws.cols(); ++j)
    out << (j ? "," : "") << "param_" << j;
  out << '\n';
  for (Eigen::Index i = 0; i < draws.rows(); ++i) {
    for (Eigen::Index j = 0; j < draws.cols(); ++j)
      out << (j ? "," : "") << format_double(draws(i, j));
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Matrix read_samples_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  const std::string source = path.string();
  for (std::size_t j = 0; j < t.header.size(); ++j)
    if (t.header[j] != "param_" + std::to_string(j))
      throw ParseError(source, 1,
                       "expected column 'param_" + std::to_string(j) + "', got '" +
                           t.header[j] + "'");
  Matrix m(static_cast<Eigen::Index>(t.rows.size()), static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < t.header.size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          parse_number(t.rows[i][j], source, t.line_numbers[i]);
  return m;
}

fs::path meta_path_for(const fs::path& csv_path) {
  fs::path p = csv_path;
  p.replace_extension(".meta.json");
  return p;
}

namespace {

json diagnostics_json(const SamplerDiagnostics& d) {
  json j{{"acceptance_rate", d.acceptance_rate},
         {"burn_in_acceptance_rate", d.burn_in_acceptance_rate},
         {"final_scale", d.final_scale}};
  j["warning"] = d.warning ? json(*d.warning) : json(nullptr);
  return j;
}

}  // namespace

void write_batch_meta(const fs::path& path, const BatchFileMeta& m) {
  json j{{"batch_id", m.batch_id},
         {"J", m.samples},
         {"d", m.dim},
         {"num_batches", m.meta.num_batches},
         {"inflation_exponent", m.meta.inflation_exponent},
         {"prior_exponent", m.meta.prior_exponent},
         {"seed", m.meta.seed},
         {"target_name", m.meta.target_name}};
  if (m.diagnostics) j["diagnostics"] = diagnostics_json(*m.diagnostics);
  write_text(path, j.dump(2) + "\n");
}

BatchFileMeta read_batch_meta(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text(path));
    BatchFileMeta m;
    m.batch_id = j.at("batch_id").get<int>();
    m.samples = j.at("J").get<long>();
    m.dim = j.at("d").get<long>();
    m.meta.num_batches = j.value("num_batches", 1);
    m.meta.inflation_exponent = j.at("inflation_exponent").get<double>();
    m.meta.prior_exponent = j.at("prior_exponent").get<double>();
    m.meta.seed = j.value("seed", std::uint64_t{0});
    m.meta.target_name = j.value("target_name", std::string{});
    return m;
  } catch (const json::exception& e) {
    throw ParseError(path.string(), 0, e.what());
  }
}

void write_batch(const fs::path& csv_path, const SampleBatch& batch,
                 const std::optional<SamplerDiagnostics>& diagnostics) {
  write_samples_csv(csv_path, batch.draws);
  write_batch_meta(meta_path_for(csv_path),
                   BatchFileMeta{batch.batch_id, static_cast<long>(batch.size()),
                                 static_cast<long>(batch.dim()), batch.meta, diagnostics});
}

SampleBatch read_batch(const fs::path& csv_path, int fallback_id) {
  SampleBatch b;
  b.draws = read_samples_csv(csv_path);
  b.batch_id = fallback_id;
  const fs::path meta = meta_path_for(csv_path);
  if (fs::exists(meta)) {
    const BatchFileMeta m = read_batch_meta(meta);
    if (m.samples != b.size() || m.dim != b.dim())
      throw DataError("'" + meta.string() + "' declares " + std::to_string(m.samples) + "x" +
                      std::to_string(m.dim) + " but the CSV holds " +
                      std::to_string(b.size()) + "x" + std::to_string(b.dim()));
    b.batch_id = m.batch_id;
    b.meta = m.meta;
  }
  return b;
}

void write_dataset_csv(const fs::path& path, const Dataset& data) {
  std::ofstream out = open_out(path);
  for (Eigen::Index j = 0; j < data.p(); ++j) out << 'x' << j << ',';
  out << 'y';
  if (data.group) out << ",group";
  out << '\n';
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.p(); ++j) out << format_double(data.x(i, j)) << ',';
    out << format_double(data.y(i));
    if (data.group) out << ',' << (*data.group)[static_cast<std::size_t>(i)];
    out << '\n';
  }
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Dataset read_dataset_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  const std::string source = path.string();
  std::vector<std::size_t> feature_cols;
  std::optional<std::size_t> y_col, group_col;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    const std::string& h = t.header[c];
    if (h == "y") {
      y_col = c;
    } else if (h == "group") {
      group_col = c;
    } else if (h == "x" + std::to_string(feature_cols.size())) {
      feature_cols.push_back(c);
    } else {
      throw ParseError(source, 1, "unexpected column '" + h + "'");
    }
  }
  if (!y_col) throw ParseError(source, 1, "missing response column 'y'");
  Dataset d;
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  d.x.resize(n, static_cast<Eigen::Index>(feature_cols.size()));
  d.y.resize(n);
  if (group_col) d.group.emplace();
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t k = 0; k < feature_cols.size(); ++k)
      d.x(r, static_cast<Eigen::Index>(k)) =
          parse_number(t.rows[i][feature_cols[k]], source, t.line_numbers[i]);
    d.y(r) = parse_number(t.rows[i][*y_col], source, t.line_numbers[i]);
    if (group_col) {
      const double g = parse_number(t.rows[i][*group_col], source, t.line_numbers[i]);
      if (g != std::floor(g))
        throw ParseError(source, t.line_numbers[i], "group must be an integer");
      d.group->push_back(static_cast<int>(g));
    }
  }
  return d;
}

void write_partition_csv(const fs::path& path, const Partition& p) {
  std::ofstream out = open_out(path);
  out << "row,batch\n";
  for (std::size_t i = 0; i < p.assignment.size(); ++i) out << i << ',' << p.assignment[i] << '\n';
}

Partition read_partition_csv(const fs::path& path) {
  const CsvTable t = read_csv(path);
  const std::string source = path.string();
  if (t.header != std::vector<std::string>{"row", "batch"})
    throw ParseError(source, 1, "expected header 'row,batch'");
  Partition p;
  p.assignment.resize(t.rows.size(), -1);
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double row = parse_number(t.rows[i][0], source, t.line_numbers[i]);
    const double batch = parse_number(t.rows[i][1], source, t.line_numbers[i]);
    if (row < 0 || row >= static_cast<double>(t.rows.size()) || batch < 0)
      throw ParseError(source, t.line_numbers[i], "row or batch out of range");
    p.assignment[static_cast<std::size_t>(row)] = static_cast<int>(batch);
    p.num_batches = std::max(p.num_batches, static_cast<int>(batch) + 1);
  }
  for (std::size_t i = 0; i < p.assignment.size(); ++i)
    if (p.assignment[i] < 0)
      throw ParseError(source, 0, "row " + std::to_string(i) + " has no batch");
  return p;
}

std::string maps_to_json(const CombineResult& result, CombineMethod method) {
  json maps = json::array();
  for (const AffineMap& m : result.per_batch_maps)
    maps.push_back({{"batch_id", m.batch_id},
                    {"matrix", matrix_json(m.matrix)},
                    {"center_in", vector_json(m.center_in)},
                    {"center_out", vector_json(m.center_out)}});
  json j{{"method", std::string(to_string(method))},
         {"rows", result.combined.rows()},
         {"pooled", {{"mean", vector_json(result.pooled.mean)},
                     {"cov", matrix_json(result.pooled.cov.matrix())}}},
         {"maps", std::move(maps)},
         {"wall_time_seconds", result.wall_time_seconds}};
  return j.dump(2) + "\n";
}

std::string metrics_to_json(const MetricReport& r) {
  json j{{"mahalanobis", r.mahalanobis},
         {"skew_dev", r.skew_dev},
         {"iad", r.iad},
         {"iad_raw", r.iad_raw},
         {"per_dimension_iad", r.per_dimension_iad}};
  return j.dump(2) + "\n";
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out = open_out(path);
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace swiss::io
