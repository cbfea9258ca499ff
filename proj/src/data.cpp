#include "mograd/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

#include "mograd/csv.hpp"

namespace mograd {

namespace {

std::size_t column_index(const std::vector<std::string>& header, const std::string& name,
                         const std::filesystem::path& path) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) {
    throw std::invalid_argument(path.string() + ": missing column '" + name + "'");
  }
  return static_cast<std::size_t>(it - header.begin());
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

// Knuth's multiplication method, normal approximation for large means.
std::size_t poisson(RngStream& rng, double mean) {
  if (mean <= 0.0) return 0;
  if (mean > 60.0) {
    return static_cast<std::size_t>(std::max(0.0, std::round(mean + std::sqrt(mean) * rng.normal())));
  }
  const double limit = std::exp(-mean);
  std::size_t k = 0;
  double p = rng.uniform();
  while (p > limit) {
    ++k;
    p *= rng.uniform();
  }
  return k;
}

void write_rows(const std::filesystem::path& path, const Interactions& data,
                const std::vector<std::size_t>& users, const std::vector<UserRow>& rows) {
  auto out = open_out(path);
  out << "user,item\n";
  for (std::size_t u = 0; u < users.size(); ++u) {
    for (std::uint32_t j : rows[u]) {
      out << csv::escape(data.users[users[u]]) << ',' << csv::escape(data.items[j]) << '\n';
    }
  }
}

void write_masked(const std::filesystem::path& dir, const std::string& name,
                  const Interactions& data, const MaskResult& mask) {
  std::vector<std::size_t> users;
  std::vector<UserRow> fold_in;
  std::vector<UserRow> held_out;
  for (const auto& u : mask.users) {
    users.push_back(u.user);
    fold_in.push_back(u.fold_in);
    held_out.push_back(u.held_out);
  }
  write_rows(dir / (name + "_fold_in.csv"), data, users, fold_in);
  write_rows(dir / (name + "_held_out.csv"), data, users, held_out);
}

}  // namespace

RatingsTable deduplicate(const RatingsTable& table) {
  std::map<std::pair<std::string, std::string>, std::size_t> latest;
  for (std::size_t i = 0; i < table.size(); ++i) {
    const auto key = std::make_pair(table[i].user, table[i].item);
    auto it = latest.find(key);
    if (it == latest.end()) {
      latest.emplace(key, i);
    } else if (table[i].timestamp >= table[it->second].timestamp) {
      it->second = i;
    }
  }
  std::vector<std::size_t> keep;
  keep.reserve(latest.size());
  for (const auto& [key, idx] : latest) keep.push_back(idx);
  std::sort(keep.begin(), keep.end());
  RatingsTable out;
  out.reserve(keep.size());
  for (std::size_t i : keep) out.push_back(table[i]);
  return out;
}

RatingsTable read_ratings_csv(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty()) throw std::invalid_argument(path.string() + ": missing header");
  const auto header = csv::split_line(lines.front());
  const std::size_t cu = column_index(header, "user", path);
  const std::size_t ci = column_index(header, "item", path);
  const std::size_t cr = column_index(header, "rating", path);
  const std::size_t ct = column_index(header, "timestamp", path);
  RatingsTable table;
  table.reserve(lines.size() - 1);
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const auto f = csv::split_line(lines[n]);
    if (f.size() != header.size()) {
      throw std::invalid_argument(path.string() + ": line " + std::to_string(n + 1) +
                                  " has " + std::to_string(f.size()) + " fields");
    }
    table.push_back(Rating{f[cu], f[ci], csv::parse_double(f[cr], "rating"),
                           static_cast<std::int64_t>(csv::parse_int(f[ct], "timestamp"))});
  }
  return table;
}

void write_ratings_csv(const std::filesystem::path& path, const RatingsTable& table) {
  auto out = open_out(path);
  out << "user,item,rating,timestamp\n";
  for (const auto& r : table) {
    out << csv::escape(r.user) << ',' << csv::escape(r.item) << ',' << csv::format_double(r.rating)
        << ',' << r.timestamp << '\n';
  }
}

std::map<std::string, double> read_prices_csv(const std::filesystem::path& path) {
  const auto lines = csv::read_lines(path);
  if (lines.empty()) throw std::invalid_argument(path.string() + ": missing header");
  const auto header = csv::split_line(lines.front());
  const std::size_t ci = column_index(header, "item", path);
  const std::size_t cp = column_index(header, "price", path);
  std::map<std::string, double> prices;
  for (std::size_t n = 1; n < lines.size(); ++n) {
    const auto f = csv::split_line(lines[n]);
    if (f.size() != header.size()) {
      throw std::invalid_argument(path.string() + ": line " + std::to_string(n + 1) +
                                  " has " + std::to_string(f.size()) + " fields");
    }
    const double p = csv::parse_double(f[cp], "price");
    if (!(p > 0.0)) throw std::invalid_argument(path.string() + ": price of '" + f[ci] + "' must be > 0");
    prices[f[ci]] = p;
  }
  return prices;
}

void write_prices_csv(const std::filesystem::path& path, const std::map<std::string, double>& prices) {
  auto out = open_out(path);
  out << "item,price\n";
  for (const auto& [item, price] : prices) {
    out << csv::escape(item) << ',' << csv::format_double(price) << '\n';
  }
}

Interactions binarize(const RatingsTable& table, double threshold) {
  Interactions out;
  std::map<std::string, std::size_t> items;
  std::map<std::string, std::vector<std::string>> positives;
  for (const auto& r : table) {
    items.emplace(r.item, 0);
    if (r.rating >= threshold) positives[r.user].push_back(r.item);
  }
  for (auto& [item, idx] : items) {
    idx = out.items.size();
    out.items.push_back(item);
  }
  for (const auto& [user, liked] : positives) {
    UserRow row;
    for (const auto& item : liked) row.push_back(static_cast<std::uint32_t>(items.at(item)));
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    out.users.push_back(user);
    out.rows.push_back(std::move(row));
  }
  return out;
}

UserSplit split_users(std::size_t num_users, const SplitRatios& ratios, std::uint64_t seed) {
  if (ratios.train < 0.0 || ratios.validation < 0.0 || ratios.test < 0.0 ||
      std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw std::invalid_argument("split ratios must be non-negative and sum to 1");
  }
  const auto n_val = static_cast<std::size_t>(std::llround(ratios.validation * static_cast<double>(num_users)));
  const auto n_test = static_cast<std::size_t>(std::llround(ratios.test * static_cast<double>(num_users)));
  if (n_val == 0 || n_test == 0 || n_val + n_test >= num_users) {
    throw std::invalid_argument("split_users: " + std::to_string(num_users) +
                                " users are too few for non-empty train/validation/test splits");
  }
  std::vector<std::size_t> order(num_users);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RngStream rng(seed);
  rng.shuffle(order);

  UserSplit split;
  const std::size_t n_train = num_users - n_val - n_test;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.validation.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                          order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  for (auto* part : {&split.train, &split.validation, &split.test}) std::sort(part->begin(), part->end());
  return split;
}

std::size_t held_out_count(std::size_t degree, double fraction) {
  if (degree < 2) return 0;
  // The small slack keeps e.g. 0.2 * 15 from rounding up to 4.
  const auto raw = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(degree) - 1e-9));
  return std::clamp<std::size_t>(raw, 1, degree - 1);
}

std::uint64_t user_mask_seed(std::uint64_t seed, const std::string& user_id) {
  return mix_seed(seed, fnv1a64(user_id));
}

MaskResult mask_interactions(const Interactions& interactions,
                             const std::vector<std::size_t>& users, double fraction,
                             std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw std::invalid_argument("mask fraction must be in (0, 1)");
  MaskResult result;
  for (std::size_t u : users) {
    const UserRow& row = interactions.rows.at(u);
    if (row.size() < 2) {
      result.excluded.push_back(u);
      continue;
    }
    UserRow shuffled = row;
    RngStream rng(user_mask_seed(seed, interactions.users[u]));
    rng.shuffle(shuffled);
    const std::size_t held = held_out_count(row.size(), fraction);
    MaskedUser m;
    m.user = u;
    m.held_out.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(held));
    m.fold_in.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(held), shuffled.end());
    std::sort(m.held_out.begin(), m.held_out.end());
    std::sort(m.fold_in.begin(), m.fold_in.end());
    result.users.push_back(std::move(m));
  }
  return result;
}

Vec64 recency_scores(const RatingsTable& table, const std::vector<std::string>& items) {
  std::unordered_map<std::string, std::int64_t> first;
  for (const auto& r : table) {
    auto [it, inserted] = first.emplace(r.item, r.timestamp);
    if (!inserted) it->second = std::min(it->second, r.timestamp);
  }
  Vec64 times(items.size());
  for (std::size_t j = 0; j < items.size(); ++j) {
    const auto it = first.find(items[j]);
    if (it == first.end()) throw std::invalid_argument("recency_scores: item '" + items[j] + "' has no timestamp");
    times[j] = static_cast<double>(it->second);
  }
  if (times.empty()) return {};
  const auto [lo, hi] = std::minmax_element(times.begin(), times.end());
  if (*hi == *lo) return Vec64(times.size(), 0.5);
  return min_max_normalize(times);
}

void SynthConfig::validate() const {
  if (num_users < 1) throw std::invalid_argument("synth.num_users must be >= 1");
  if (num_items < 1) throw std::invalid_argument("synth.num_items must be >= 1");
  if (!(density > 0.0 && density <= 1.0)) throw std::invalid_argument("synth.density must be in (0, 1]");
  if (num_clusters < 1) throw std::invalid_argument("synth.num_clusters must be >= 1");
  if (latent_dim < 1) throw std::invalid_argument("synth.latent_dim must be >= 1");
  if (!(price_log_sigma >= 0.0)) throw std::invalid_argument("synth.price_log_sigma must be >= 0");
  if (time_span < 1) throw std::invalid_argument("synth.time_span must be >= 1");
}

SynthData synth_dataset(const SynthConfig& config) {
  config.validate();
  RngStream rng(config.seed);
  const std::size_t users = config.num_users;
  const std::size_t items = config.num_items;
  const std::size_t dim = config.latent_dim;
  const double item_scale = 1.0 / std::sqrt(static_cast<double>(dim));

  std::vector<Vec64> centers(config.num_clusters);
  for (auto& c : centers) c = rand_normal(rng, dim);
  std::vector<Vec64> item_factors(items);
  Vec64 popularity(items);
  Vec64 release(items);
  SynthData data;
  for (std::size_t j = 0; j < items; ++j) {
    item_factors[j] = scaled(rand_normal(rng, dim), item_scale * 2.0);
    popularity[j] = 0.5 * rng.normal();
    release[j] = rng.uniform();
    double price = std::exp(config.price_log_mean + config.price_log_sigma * rng.normal());
    price = std::max(0.01, std::round(price * 100.0) / 100.0);
    data.prices["i" + std::to_string(j)] = price;
  }

  const double span = static_cast<double>(config.time_span);
  const double mean_degree = config.density * static_cast<double>(items);
  for (std::size_t u = 0; u < users; ++u) {
    const Vec64& center = centers[rng.below(centers.size())];
    Vec64 taste = center;
    for (auto& t : taste) t += 0.5 * rng.normal();

    const std::size_t degree = std::clamp<std::size_t>(poisson(rng, mean_degree), 1, items);

    Vec64 affinity(items);
    for (std::size_t j = 0; j < items; ++j) affinity[j] = dot(taste, item_factors[j]) + popularity[j];
    double mean = 0.0;
    for (double a : affinity) mean += a;
    mean /= static_cast<double>(items);
    double var = 0.0;
    for (double a : affinity) var += (a - mean) * (a - mean);
    const double sd = std::sqrt(var / static_cast<double>(items)) + 1e-12;

    // Gumbel top-k: sampling without replacement proportional to exp(2 * affinity).
    std::vector<std::pair<double, std::size_t>> keys(items);
    for (std::size_t j = 0; j < items; ++j) {
      const double gumbel = -std::log(-std::log(1.0 - rng.uniform() * (1.0 - 1e-16)));
      keys[j] = {2.0 * affinity[j] + gumbel, j};
    }
    std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(degree), keys.end(),
                      [](const auto& a, const auto& b) { return a.first != b.first ? a.first > b.first : a.second < b.second; });

    const std::string user_id = "u" + std::to_string(u);
    for (std::size_t r = 0; r < degree; ++r) {
      const std::size_t j = keys[r].second;
      double rating = 3.4 + 1.2 * (affinity[j] - mean) / sd + 0.5 * rng.normal();
      rating = std::clamp(std::round(rating * 2.0) / 2.0, 0.5, 5.0);
      const double delay = -std::log(1.0 - rng.uniform()) * 0.05;
      const double when = std::min(1.0, release[j] + delay);
      data.ratings.push_back(Rating{user_id, "i" + std::to_string(j), rating,
                                    config.time_start + static_cast<std::int64_t>(when * span)});
    }
  }
  return data;
}

SplitDataset prepare_dataset(const RatingsTable& raw, const std::map<std::string, double>& prices,
                             const PrepareOptions& options) {
  SplitDataset data;
  data.options = options;
  const RatingsTable table = deduplicate(raw);
  data.interactions = binarize(table, options.threshold);
  const auto& inter = data.interactions;
  data.split = split_users(inter.users.size(), options.ratios, mix_seed(options.seed, 1));
  for (std::size_t u : data.split.train) data.train_rows.push_back(inter.rows[u]);
  data.validation = mask_interactions(inter, data.split.validation, options.mask_fraction,
                                      mix_seed(options.seed, 2));
  data.test = mask_interactions(inter, data.split.test, options.mask_fraction,
                                mix_seed(options.seed, 3));

  auto& w = data.weights;
  Vec64 known;
  for (const auto& item : inter.items) {
    const auto it = prices.find(item);
    if (it != prices.end()) known.push_back(it->second);
  }
  double fallback = 1.0;
  if (!known.empty()) {
    std::sort(known.begin(), known.end());
    const std::size_t mid = known.size() / 2;
    fallback = known.size() % 2 ? known[mid] : 0.5 * (known[mid - 1] + known[mid]);
  }
  for (const auto& item : inter.items) {
    const auto it = prices.find(item);
    if (it != prices.end()) {
      w.prices.push_back(it->second);
    } else {
      w.prices.push_back(fallback);
      if (!prices.empty()) ++data.missing_prices;
    }
  }
  w.recency_raw = recency_scores(table, inter.items);
  for (double rho : w.recency_raw) w.recency.push_back(recency_transform(rho));
  return data;
}

nlohmann::json SplitDataset::manifest() const {
  nlohmann::json j;
  j["seed"] = options.seed;
  j["threshold"] = options.threshold;
  j["ratios"] = {options.ratios.train, options.ratios.validation, options.ratios.test};
  j["mask_fraction"] = options.mask_fraction;
  j["counts"] = {
      {"users", interactions.users.size()},
      {"items", interactions.items.size()},
      {"train_users", split.train.size()},
      {"validation_users", split.validation.size()},
      {"test_users", split.test.size()},
      {"validation_masked", validation.users.size()},
      {"test_masked", test.users.size()},
      {"missing_prices", missing_prices},
  };
  nlohmann::json excluded = nlohmann::json::array();
  for (const auto* mask : {&validation, &test}) {
    for (std::size_t u : mask->excluded) excluded.push_back(interactions.users[u]);
  }
  j["excluded_users"] = excluded;
  j["recency_normalization"] = "global min-max of first-rating timestamps across items";
  return j;
}

void write_split(const std::filesystem::path& dir, const SplitDataset& data) {
  std::filesystem::create_directories(dir);
  const auto& inter = data.interactions;
  write_rows(dir / "train.csv", inter, data.split.train, data.train_rows);
  write_masked(dir, "validation", inter, data.validation);
  write_masked(dir, "test", inter, data.test);
  {
    auto out = open_out(dir / "items.csv");
    out << "item,price,recency_raw,recency\n";
    for (std::size_t j = 0; j < inter.items.size(); ++j) {
      out << csv::escape(inter.items[j]) << ',' << csv::format_double(data.weights.prices[j]) << ','
          << csv::format_double(data.weights.recency_raw[j]) << ','
          << csv::format_double(data.weights.recency[j]) << '\n';
    }
  }
  auto out = open_out(dir / "manifest.json");
  out << data.manifest().dump(2) << '\n';
}

}  // namespace mograd
