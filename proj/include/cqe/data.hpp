#pragma once
// Interaction-log ingestion, the binary interest label, and the hashing
// feature encoder psi(u, v, c).

#include "cqe/common.hpp"

#include <string>
#include <vector>

namespace cqe {

struct InteractionRecord {
  std::string user_id;
  std::string item_id;
  std::vector<std::string> context;       // categorical tokens, "column=value"
  std::vector<double> numeric_feats;      // ordered as the num_ columns
  double duration_s = 0.0;
  double watch_time_s = 0.0;
};

// Column mapping for the interaction CSV. Optional feature columns are
// recognized by prefix.
struct CsvSchema {
  std::string user_col = "user_id";
  std::string item_col = "item_id";
  std::string duration_col = "duration_s";
  std::string watch_col = "watch_time_s";
  std::string cat_prefix = "cat_";
  std::string num_prefix = "num_";
};

struct LoadReport {
  std::vector<InteractionRecord> records;
  std::vector<std::string> cat_columns;  // in header order
  std::vector<std::string> num_columns;
  std::size_t rows_total = 0;
  std::size_t rows_skipped = 0;
  std::vector<std::string> skip_samples;  // first few skip reasons
};

// Parses the interaction CSV (UTF-8, ',' separator, '.' decimals, '#' comment
// lines skipped). Malformed rows are counted and skipped; a missing required
// column raises SchemaError, an unreadable file IoError.
LoadReport load_csv(const std::string& path, const CsvSchema& schema = {});

// 1 iff (d <= 18 and w >= d - 1e-6) or (d > 18 and w > 18). The tolerance on
// the full-watch branch absorbs float watch-time logging.
int interest_label(double duration_s, double watch_time_s);

// Deterministic fixed-width encoder: hashed categorical one-hot buckets
// (user id, item id and context tokens) followed by standardized numeric
// features. Output length is n_dims = hash_dims + #numeric columns.
struct FeatureEncoder {
  int hash_dims = 0;
  std::uint64_t hash_seed = 0;
  bool fitted = false;
  std::vector<std::string> num_columns;
  Vec num_mean;
  Vec num_std;

  int n_dims() const { return hash_dims + static_cast<int>(num_columns.size()); }
};

// n_dims is the total output width; the hashed block gets n_dims minus the
// number of numeric columns (must stay >= 1).
FeatureEncoder fit_encoder(const std::vector<InteractionRecord>& data,
                           int n_dims, std::uint64_t hash_seed,
                           const std::vector<std::string>& num_columns);

std::uint64_t hash_token(const std::string& token, std::uint64_t seed);

Vec encode(const InteractionRecord& record, const FeatureEncoder& encoder);

// Encodes records[idx[begin..end)] into rows of a dense matrix.
Mat encode_batch(const std::vector<InteractionRecord>& records,
                 const std::vector<std::size_t>& idx, std::size_t begin,
                 std::size_t end, const FeatureEncoder& encoder);

}  // namespace cqe
