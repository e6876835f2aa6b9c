#include "cqe/data.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace cqe {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  errno = 0;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size() && errno != ERANGE && std::isfinite(out);
}

}  // namespace

LoadReport load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open data file '" + path + "'");

  std::string line;
  // Header: first non-comment line.
  do {
    if (!std::getline(in, line)) throw SchemaError("'" + path + "': no header row");
  } while (!line.empty() && line[0] == '#');
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const std::vector<std::string> header = split_csv_line(line);
  auto find_col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw SchemaError("'" + path + "': missing required column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_user = find_col(schema.user_col);
  const std::size_t c_item = find_col(schema.item_col);
  const std::size_t c_dur = find_col(schema.duration_col);
  const std::size_t c_watch = find_col(schema.watch_col);

  LoadReport report;
  std::vector<std::size_t> cat_idx, num_idx;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i].rfind(schema.cat_prefix, 0) == 0) {
      cat_idx.push_back(i);
      report.cat_columns.push_back(header[i]);
    } else if (header[i].rfind(schema.num_prefix, 0) == 0) {
      num_idx.push_back(i);
      report.num_columns.push_back(header[i]);
    }
  }

  auto skip = [&](std::size_t row, const std::string& why) {
    ++report.rows_skipped;
    if (report.skip_samples.size() < 10)
      report.skip_samples.push_back("row " + std::to_string(row) + ": " + why);
  };

  std::size_t row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') continue;
    ++report.rows_total;
    const std::vector<std::string> fields = split_csv_line(line);
    if (fields.size() != header.size()) {
      skip(row_no, "expected " + std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
      continue;
    }
    InteractionRecord rec;
    rec.user_id = fields[c_user];
    rec.item_id = fields[c_item];
    if (!parse_double(fields[c_dur], rec.duration_s) || rec.duration_s <= 0.0) {
      skip(row_no, "bad duration '" + fields[c_dur] + "'");
      continue;
    }
    if (!parse_double(fields[c_watch], rec.watch_time_s) || rec.watch_time_s < 0.0) {
      skip(row_no, "bad watch time '" + fields[c_watch] + "'");
      continue;
    }
    bool ok = true;
    rec.numeric_feats.reserve(num_idx.size());
    for (std::size_t i : num_idx) {
      double v;
      if (!parse_double(fields[i], v)) {
        skip(row_no, "bad numeric feature '" + header[i] + "'");
        ok = false;
        break;
      }
      rec.numeric_feats.push_back(v);
    }
    if (!ok) continue;
    rec.context.reserve(cat_idx.size());
    for (std::size_t i : cat_idx) rec.context.push_back(header[i] + "=" + fields[i]);
    report.records.push_back(std::move(rec));
  }
  return report;
}

int interest_label(double duration_s, double watch_time_s) {
  if (!(duration_s > 0.0) || !std::isfinite(duration_s))
    throw std::invalid_argument("interest_label: duration must be > 0");
  if (!(watch_time_s >= 0.0) || !std::isfinite(watch_time_s))
    throw std::invalid_argument("interest_label: watch time must be >= 0");
  if (duration_s <= 18.0) return watch_time_s >= duration_s - 1e-6 ? 1 : 0;
  return watch_time_s > 18.0 ? 1 : 0;
}

std::uint64_t hash_token(const std::string& token, std::uint64_t seed) {
  // FNV-1a folded with the seed.
  std::uint64_t h = 1469598103934665603ULL ^ (seed * 0x9E3779B97F4A7C15ULL);
  for (unsigned char c : token) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

FeatureEncoder fit_encoder(const std::vector<InteractionRecord>& data,
                           int n_dims, std::uint64_t hash_seed,
                           const std::vector<std::string>& num_columns) {
  if (data.empty()) throw std::invalid_argument("fit_encoder: empty dataset");
  const int n_num = static_cast<int>(num_columns.size());
  if (n_dims - n_num < 1)
    throw std::invalid_argument(
        "fit_encoder: n_dims must exceed the numeric column count");
  FeatureEncoder enc;
  enc.hash_dims = n_dims - n_num;
  enc.hash_seed = hash_seed;
  enc.num_columns = num_columns;
  enc.num_mean = Vec::Zero(n_num);
  enc.num_std = Vec::Zero(n_num);
  for (const InteractionRecord& r : data) {
    if (static_cast<int>(r.numeric_feats.size()) != n_num)
      throw std::invalid_argument("fit_encoder: record feature count mismatch");
    for (int j = 0; j < n_num; ++j) enc.num_mean[j] += r.numeric_feats[j];
  }
  enc.num_mean /= static_cast<double>(data.size());
  for (const InteractionRecord& r : data)
    for (int j = 0; j < n_num; ++j) {
      const double d = r.numeric_feats[j] - enc.num_mean[j];
      enc.num_std[j] += d * d;
    }
  enc.num_std = (enc.num_std / static_cast<double>(data.size())).cwiseSqrt();
  enc.fitted = true;
  return enc;
}

namespace {

using StridedRow = Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>>;

void encode_into(const InteractionRecord& record, const FeatureEncoder& enc,
                 StridedRow out) {
  if (!enc.fitted) throw std::logic_error("encode: encoder not fitted");
  const int n_num = static_cast<int>(enc.num_columns.size());
  if (static_cast<int>(record.numeric_feats.size()) != n_num)
    throw std::invalid_argument("encode: record feature count mismatch");
  out.setZero();
  auto bucket = [&](const std::string& token) {
    return static_cast<Eigen::Index>(
        hash_token(token, enc.hash_seed) % static_cast<std::uint64_t>(enc.hash_dims));
  };
  out[bucket("u:" + record.user_id)] += 1.0;
  out[bucket("i:" + record.item_id)] += 1.0;
  for (const std::string& tok : record.context) out[bucket("c:" + tok)] += 1.0;
  for (int j = 0; j < n_num; ++j) {
    const double sd = enc.num_std[j];
    out[enc.hash_dims + j] =
        sd > 1e-12 ? (record.numeric_feats[j] - enc.num_mean[j]) / sd : 0.0;
  }
}

}  // namespace

Vec encode(const InteractionRecord& record, const FeatureEncoder& encoder) {
  Eigen::RowVectorXd row(encoder.n_dims());
  encode_into(record, encoder, row);
  return row.transpose();
}

Mat encode_batch(const std::vector<InteractionRecord>& records,
                 const std::vector<std::size_t>& idx, std::size_t begin,
                 std::size_t end, const FeatureEncoder& encoder) {
  Mat x(end - begin, encoder.n_dims());
  for (std::size_t i = begin; i < end; ++i)
    encode_into(records[idx[i]], encoder, x.row(static_cast<Eigen::Index>(i - begin)));
  return x;
}

}  // namespace cqe
