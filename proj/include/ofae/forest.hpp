#pragma once

// Unsupervised bagging ensemble of oblique trees. The trees are regressors
// fit against one synthetic Uniform[0,1) target vector, so the ensemble
// partitions the input space without labels.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ofae/error.hpp"
#include "ofae/numkit.hpp"
#include "ofae/otree.hpp"
#include "ofae/parallel.hpp"
#include "ofae/standardizer.hpp"
#include "ofae/transforms.hpp"

namespace ofae {

enum class ChannelTag { R, G, B, gray };

inline std::string_view to_string(ChannelTag tag) {
  switch (tag) {
    case ChannelTag::R: return "R";
    case ChannelTag::G: return "G";
    case ChannelTag::B: return "B";
    case ChannelTag::gray: return "gray";
  }
  return "gray";
}

inline std::optional<ChannelTag> parse_channel_tag(std::string_view s) {
  if (s == "R") return ChannelTag::R;
  if (s == "G") return ChannelTag::G;
  if (s == "B") return ChannelTag::B;
  if (s == "gray") return ChannelTag::gray;
  return std::nullopt;
}

struct ForestConfig {
  TreeKind tree_kind = TreeKind::hhcart;
  TransformKind transform = TransformKind::eig;
  std::size_t n_estimators = 100;
  std::size_t max_depth = 3;
  double max_samples = 1.0;
  double max_features = 1.0;
  std::uint64_t seed = 0;

  void validate() const {
    auto bad = [](const std::string& m) { throw Error(ErrorKind::ConfigInvalid, m); };
    if (n_estimators < 1) bad("n_estimators must be >= 1");
    if (max_depth < 1) bad("max_depth must be >= 1");
    if (!(max_samples > 0.0 && max_samples <= 1.0)) bad("max_samples must be in (0, 1]");
    if (!(max_features > 0.0 && max_features <= 1.0)) bad("max_features must be in (0, 1]");
  }

  friend bool operator==(const ForestConfig&, const ForestConfig&) = default;
};

/// ceil(fraction * n), at least 1 and at most n.
inline std::size_t fraction_count(double fraction, std::size_t n) {
  // guard against 0.75 * 8 evaluating to 6.000000000000001
  const double raw = fraction * static_cast<double>(n);
  auto c = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
  return std::clamp<std::size_t>(c, 1, n);
}

/// Image geometry of the sample a model encodes: (height, width, channels of
/// the source image). A per-channel model sees height * width features.
using ImageShape = std::array<std::size_t, 3>;

struct ForestModel {
  ForestConfig config;
  std::vector<ObliqueTree> trees;
  std::size_t p = 0;
  std::optional<Standardizer> standardizer;
  std::optional<ChannelTag> channel_tag;
  std::optional<ImageShape> image_shape;

  std::size_t n_estimators() const noexcept { return trees.size(); }

  friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

struct FitOptions {
  std::size_t workers = 1;
};

/// Bootstrap rows and feature subset of estimator t, drawn from the
/// estimator's own substream. Exposed for tests.
struct EstimatorDraw {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> features;  // sorted, duplicate-free
};

inline EstimatorDraw draw_estimator(Rng& rng, std::size_t n, std::size_t p, const ForestConfig& config) {
  EstimatorDraw d;
  const std::size_t n_rows = fraction_count(config.max_samples, n);
  d.rows.resize(n_rows);
  for (auto& r : d.rows) r = rng.below(n);

  const std::size_t k = fraction_count(config.max_features, p);
  std::vector<std::size_t> perm(p);
  for (std::size_t i = 0; i < p; ++i) perm[i] = i;
  for (std::size_t i = 0; i < k; ++i) std::swap(perm[i], perm[i + rng.below(p - i)]);
  d.features.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(k));
  std::sort(d.features.begin(), d.features.end());
  return d;
}

/// Synthetic targets y_i ~ Uniform[0,1), one per training row.
inline Vector synthetic_targets(std::uint64_t seed, std::size_t n) {
  Rng rng = Rng(seed).substream("targets");
  Vector y(n);
  for (auto& v : y) v = rng.uniform();
  return y;
}

inline ForestModel fit(const Matrix& x, const ForestConfig& config, const FitOptions& options = {}) {
  config.validate();
  const std::size_t n = x.rows();
  const std::size_t p = x.cols();
  if (n < 2 || p < 1) throw Error(ErrorKind::EmptyData, "forest fit needs n >= 2 and p >= 1");

  const Vector y = synthetic_targets(config.seed, n);
  const Rng root(config.seed);

  ForestModel model;
  model.config = config;
  model.p = p;
  model.trees.resize(config.n_estimators);
  parallel_for(config.n_estimators, options.workers, [&](std::size_t t) {
    Rng rng = root.substream(static_cast<std::uint64_t>(t));
    const EstimatorDraw draw = draw_estimator(rng, n, p, config);
    const Matrix xt = x.select_rows(draw.rows).select_cols(draw.features);
    Vector yt(draw.rows.size());
    for (std::size_t i = 0; i < draw.rows.size(); ++i) yt[i] = y[draw.rows[i]];
    const TreeFitParams params{config.max_depth, config.transform};
    model.trees[t] = config.tree_kind == TreeKind::hhcart ? fit_hhcart(xt, yt, params, rng, draw.features)
                                                          : fit_randcart(xt, yt, params, rng, draw.features);
  });
  return model;
}

inline std::vector<SignedPath> apply_all(const ForestModel& model, std::span<const double> x) {
  if (x.size() != model.p) {
    throw Error(ErrorKind::DimensionMismatch,
                "sample has " + std::to_string(x.size()) + " features, model expects " + std::to_string(model.p));
  }
  std::vector<SignedPath> paths;
  paths.reserve(model.trees.size());
  for (const auto& tree : model.trees) paths.push_back(tree.apply(x));
  return paths;
}

}  // namespace ofae
