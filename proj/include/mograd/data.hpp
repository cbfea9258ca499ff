#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "mograd/recsys.hpp"

namespace mograd {

struct Rating {
  std::string user;
  std::string item;
  double rating = 0.0;
  std::int64_t timestamp = 0;
};

using RatingsTable = std::vector<Rating>;

/// Keeps one record per (user, item): the one with the latest timestamp.
RatingsTable deduplicate(const RatingsTable& table);

/// Reads `user,item,rating,timestamp` CSV (header required).
RatingsTable read_ratings_csv(const std::filesystem::path& path);
void write_ratings_csv(const std::filesystem::path& path, const RatingsTable& table);

/// Reads `item,price` CSV (header required).
std::map<std::string, double> read_prices_csv(const std::filesystem::path& path);
void write_prices_csv(const std::filesystem::path& path, const std::map<std::string, double>& prices);

/// Positive interactions only. Items are every item id seen in the table
/// (sorted), users are those with at least one positive (sorted).
struct Interactions {
  std::vector<std::string> users;
  std::vector<std::string> items;
  std::vector<UserRow> rows;  // one per entry of `users`
};

/// rating >= threshold is positive; everything else is dropped.
Interactions binarize(const RatingsTable& table, double threshold = 3.5);

struct SplitRatios {
  double train = 0.90;
  double validation = 0.05;
  double test = 0.05;
};

/// Disjoint user index sets into Interactions::users.
struct UserSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;
};

/// Seeded shuffle of the users, cut by the ratios (validation and test sizes
/// are rounded, training gets the rest). Throws when a split would be empty.
UserSplit split_users(std::size_t num_users, const SplitRatios& ratios, std::uint64_t seed);

struct MaskResult {
  std::vector<MaskedUser> users;
  /// Users skipped for having fewer than two interactions.
  std::vector<std::size_t> excluded;
};

/// Number of held-out items for a user of the given degree: ceil(fraction * degree),
/// kept within [1, degree - 1].
std::size_t held_out_count(std::size_t degree, double fraction);

/// Seed used for one user's mask: mix_seed(seed, fnv1a64(user_id)).
std::uint64_t user_mask_seed(std::uint64_t seed, const std::string& user_id);

/// Per-user seeded hold-out of held_out_count(...) interactions.
MaskResult mask_interactions(const Interactions& interactions,
                             const std::vector<std::size_t>& users, double fraction,
                             std::uint64_t seed);

/// First-rating timestamp of each item, min-max scaled across items into
/// [0, 1]. When every item shares one timestamp all scores are 0.5.
Vec64 recency_scores(const RatingsTable& table, const std::vector<std::string>& items);

struct SynthConfig {
  std::size_t num_users = 2000;
  std::size_t num_items = 200;
  /// Expected fraction of the catalogue each user rates.
  double density = 0.05;
  std::size_t num_clusters = 8;
  std::size_t latent_dim = 8;
  double price_log_mean = 2.5;
  double price_log_sigma = 0.8;
  std::int64_t time_start = 1'000'000'000;
  std::int64_t time_span = 300'000'000;
  std::uint64_t seed = 0;

  void validate() const;
};

struct SynthData {
  RatingsTable ratings;
  std::map<std::string, double> prices;
};

/// Clustered latent-factor users and items. Each user rates about
/// density * num_items items drawn by affinity; ratings are half-stars in
/// [0.5, 5]; prices are log-normal; each item has a uniform release time and
/// its ratings follow it.
SynthData synth_dataset(const SynthConfig& config);

struct PrepareOptions {
  double threshold = 3.5;
  SplitRatios ratios;
  double mask_fraction = 0.20;
  std::uint64_t seed = 0;
};

struct SplitDataset {
  Interactions interactions;
  UserSplit split;
  std::vector<UserRow> train_rows;
  MaskResult validation;
  MaskResult test;
  ItemWeights weights;
  std::size_t missing_prices = 0;
  PrepareOptions options;

  nlohmann::json manifest() const;
};

/// Binarize, split by user, mask evaluation users and attach item weights.
/// Items missing from `prices` get the median known price (counted in
/// missing_prices); an empty price map gives every item price 1.
SplitDataset prepare_dataset(const RatingsTable& table, const std::map<std::string, double>& prices,
                             const PrepareOptions& options);

/// Writes train/validation/test CSVs, items.csv and manifest.json into dir.
void write_split(const std::filesystem::path& dir, const SplitDataset& data);

}  // namespace mograd
