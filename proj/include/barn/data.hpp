#pragma once

#include "barn/common.hpp"

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace barn::data {

// ---------------------------------------------------------------------------
// Errors

class DataError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class FileNotFoundError : public DataError {
  using DataError::DataError;
};

/// A cell that is not a finite number, or a ragged row.
class CsvParseError : public DataError {
 public:
  CsvParseError(const std::string& what, std::size_t line, std::size_t column)
      : DataError(what), line_(line), column_(column) {}
  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

class MissingColumnError : public DataError {
 public:
  MissingColumnError(const std::string& column, std::vector<std::string> available);
  const std::vector<std::string>& available() const noexcept { return available_; }

 private:
  std::vector<std::string> available_;
};

// ---------------------------------------------------------------------------
// Dataset

enum class Part { Train, Validation, Test };

struct Split {
  std::vector<Index> train;
  std::vector<Index> validation;
  std::vector<Index> test;

  const std::vector<Index>& indices(Part p) const;
  bool operator==(const Split&) const = default;
};

struct TargetStats {
  double mean = 0.0;
  double std = 1.0;
};

/// Feature centering + rotation onto principal axes, fitted on training rows.
struct PcaTransform {
  Vector mean;       ///< d
  Matrix components; ///< d x d, columns are orthonormal axes ordered by variance
  Vector variances;  ///< training variance along each axis, descending
};

struct Dataset {
  std::string name;
  Matrix X;
  Vector y;
  std::vector<std::string> feature_names;
  std::string target_name = "y";

  std::optional<Split> split;
  std::optional<TargetStats> y_stats; ///< set once y is standardized
  std::optional<PcaTransform> pca;    ///< set once X is transformed

  Index rows() const noexcept { return X.rows(); }
  Index features() const noexcept { return X.cols(); }

  /// Rows of X / y belonging to a split part. Requires a split.
  Matrix features(Part p) const;
  Vector target(Part p) const;
};

Matrix select_rows(const Matrix& X, const std::vector<Index>& rows);
Vector select_rows(const Vector& y, const std::vector<Index>& rows);

// ---------------------------------------------------------------------------
// I/O

/// Numeric CSV with a header row. The target column is removed from X.
Dataset load_csv(const std::filesystem::path& path, const std::string& target_column);

/// Writes features then the target as the last column.
void write_csv(const Dataset& ds, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Splitting and preprocessing

struct SplitFractions {
  double train = 0.5;
  double validation = 0.25;
  double test = 0.25;
};

/// Shuffles row indices, then takes floor(n*train) training rows,
/// floor(n*validation) validation rows and the remainder as test rows.
Dataset split(Dataset ds, const SplitFractions& fractions, Rng& rng);
Split make_split(Index n, const SplitFractions& fractions, Rng& rng);

/// Rescales y to zero mean and unit (population) variance on training rows.
Dataset standardize_y(Dataset ds);

/// Centers and rotates X onto the training principal axes, keeping every
/// component. With whiten=true each component is also scaled to unit
/// variance.
Dataset pca_fit_transform(Dataset ds, bool whiten = false);

PcaTransform fit_pca(const Matrix& X_train);
Matrix apply_pca(const PcaTransform& pca, const Matrix& X, bool whiten = false);

// ---------------------------------------------------------------------------
// Synthetic data

enum class Relationship { Linear, Cluster, Forest, Friedman1, Friedman2, Friedman3 };

std::string to_string(Relationship r);
Relationship parse_relationship(const std::string& name);

/// Input ranges for the second and third Friedman functions.
struct FriedmanRanges {
  std::array<double, 2> x1{0.0, 100.0};
  std::array<double, 2> x2{40.0 * 3.14159265358979323846, 560.0 * 3.14159265358979323846};
  std::array<double, 2> x3{0.0, 1.0};
  std::array<double, 2> x4{1.0, 11.0};
};

struct SynthSpec {
  std::string name;
  Relationship relationship = Relationship::Linear;
  double snr = 10.0;            ///< var(signal) / var(noise); <= 0 is rejected
  bool noiseless = false;       ///< skip noise entirely
  int n_relevant = 10;          ///< features generated before irrelevant padding
  double pct_irrelevant = 0.10; ///< appended columns = round(pct * n_relevant)
  int n_points = 1000;
  std::uint64_t seed = 0;

  int n_clusters = 10;
  int forest_trees = 20;
  int forest_depth = 4;
  bool forest_bootstrap = true;

  FriedmanRanges friedman_ranges;

  void validate() const;
};

/// The benchmark "random" problem: 8 relevant linear features, 2 irrelevant,
/// 1000 rows.
SynthSpec random_benchmark_spec(std::uint64_t seed = 0);

struct Synthetic {
  Dataset data;
  Vector clean_y;    ///< target before noise
  Vector coefficients; ///< linear generator only: beta over all columns
};

Synthetic generate(const SynthSpec& spec);
Synthetic gen_linear(const SynthSpec& spec);
Synthetic gen_cluster(const SynthSpec& spec);
Synthetic gen_forest(const SynthSpec& spec);
Synthetic gen_friedman(const SynthSpec& spec);

double friedman1(const double* x);
double friedman2(const double* x);
double friedman3(const double* x);

/// Adds N(0, var(y_clean)/snr) noise. Constant y_clean gets no noise.
Vector add_noise(const Vector& y_clean, double snr, Rng& rng);

/// Appends round(pct * X.cols()) standard normal columns.
Matrix add_irrelevant(const Matrix& X, double pct, Rng& rng);

/// Nearest-center assignment used by the cluster generator.
std::vector<Index> assign_clusters(const Matrix& X, const Matrix& centers);

// ---------------------------------------------------------------------------
// Small random forest used only to generate the "forest" targets.

struct ForestConfig {
  int trees = 20;
  int max_depth = 4;
  bool bootstrap = true;
  /// Features tried per split; 0 means round(sqrt(d)).
  int features_per_split = 0;
  int min_leaf = 1;
};

class RandomForest {
 public:
  static RandomForest fit(const Matrix& X, const Vector& y, const ForestConfig& cfg, Rng& rng);
  Vector predict(const Matrix& X) const;

 private:
  struct Node {
    int feature = -1; ///< -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;
    int left = -1;
    int right = -1;
  };
  using Tree = std::vector<Node>;

  static double predict_tree(const Tree& tree, const Matrix& X, Index row);

  std::vector<Tree> trees_;
  friend class TreeBuilder;
};

}  // namespace barn::data
