#include "crossrec/dataset.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "json.hpp"

namespace crossrec {

std::string to_string(ProtocolSpec::Kind k) {
  switch (k) {
    case ProtocolSpec::Kind::Sparse: return "sparse";
    case ProtocolSpec::Kind::ColdStart: return "cold_start";
    case ProtocolSpec::Kind::FullColdStart: return "full_cold_start";
  }
  return "?";
}

ProtocolSpec::Kind protocol_kind_from_string(const std::string& s) {
  if (s == "sparse") return ProtocolSpec::Kind::Sparse;
  if (s == "cold_start") return ProtocolSpec::Kind::ColdStart;
  if (s == "full_cold_start") return ProtocolSpec::Kind::FullColdStart;
  throw std::invalid_argument("unknown protocol kind: " + s);
}

std::vector<std::size_t> CrossDomainDataset::target_train_counts() const {
  std::vector<std::size_t> counts(num_users(), 0);
  for (const auto& t : triples)
    if (t.domain == Domain::Target && trains(t)) ++counts[t.user];
  return counts;
}

std::size_t CrossDomainDataset::num_target_train() const {
  std::size_t n = 0;
  for (const auto& t : triples)
    if (t.domain == Domain::Target && trains(t)) ++n;
  return n;
}

Vector CrossDomainDataset::source_row(std::uint32_t user, bool scaled) const {
  Vector row(num_source_items(), 0.0);
  const double s = scaled ? 1.0 / gamma_max : 1.0;
  for (const auto& t : triples)
    if (t.domain == Domain::Source && t.user == user && !t.removed) row[t.item] = s * t.value;
  return row;
}

Vector CrossDomainDataset::target_train_row(std::uint32_t user) const {
  Vector row(num_target_items(), 0.0);
  const std::size_t off = num_source_items();
  for (const auto& t : triples)
    if (t.domain == Domain::Target && t.user == user && trains(t)) row[t.item - off] = t.value;
  return row;
}

RatingsDataset load_ratings(const std::string& path, double gamma_min, double gamma_max) {
  if (gamma_min <= 0.0 || gamma_max < gamma_min)
    throw std::invalid_argument("load_ratings: need 0 < gamma_min <= gamma_max");
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_ratings: cannot open " + path);

  RatingsDataset ds;
  ds.gamma_min = gamma_min;
  ds.gamma_max = gamma_max;
  std::unordered_map<std::string, std::uint32_t> users, items;
  // (user,item) -> triple slot, so re-ratings collapse to the last occurrence
  std::unordered_map<std::uint64_t, std::size_t> seen;
  std::size_t duplicates = 0;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string uid, iid, rstr;
    if (!std::getline(ls, uid, '\t') || !std::getline(ls, iid, '\t') ||
        !std::getline(ls, rstr, '\t'))
      throw std::runtime_error("load_ratings: malformed line " + std::to_string(lineno) +
                               " in " + path);
    double r;
    try {
      std::size_t pos = 0;
      r = std::stod(rstr, &pos);
      if (pos != rstr.size()) throw std::invalid_argument(rstr);
    } catch (const std::exception&) {
      throw std::runtime_error("load_ratings: malformed rating at line " +
                               std::to_string(lineno) + " in " + path);
    }
    if (r < gamma_min || r > gamma_max)
      throw std::runtime_error("load_ratings: rating " + rstr + " outside [" +
                               std::to_string(gamma_min) + "," + std::to_string(gamma_max) +
                               "] at line " + std::to_string(lineno));
    auto [uit, unew] = users.try_emplace(uid, static_cast<std::uint32_t>(ds.user_ids.size()));
    if (unew) ds.user_ids.push_back(uid);
    auto [iit, inew] = items.try_emplace(iid, static_cast<std::uint32_t>(ds.item_ids.size()));
    if (inew) ds.item_ids.push_back(iid);
    const std::uint64_t key =
        (static_cast<std::uint64_t>(uit->second) << 32) | iit->second;
    auto [sit, fresh] = seen.try_emplace(key, ds.triples.size());
    if (fresh) {
      ds.triples.push_back({uit->second, iit->second, r});
    } else {
      ds.triples[sit->second].value = r;
      ++duplicates;
    }
  }
  if (duplicates > 0)
    std::cerr << "load_ratings: " << duplicates << " duplicate (user,item) lines in " << path
              << ", kept last occurrence\n";
  if (ds.triples.empty()) throw std::runtime_error("load_ratings: no ratings in " + path);
  return ds;
}

CrossDomainDataset align_domains(const RatingsDataset& src, const RatingsDataset& tgt,
                                 std::size_t min_ratings) {
  if (src.triples.empty() || tgt.triples.empty())
    throw std::invalid_argument("align_domains: empty input dataset");

  // 1. common-user filter
  std::unordered_set<std::string> src_users(src.user_ids.begin(), src.user_ids.end());
  std::unordered_set<std::string> common;
  for (const auto& u : tgt.user_ids)
    if (src_users.count(u)) common.insert(u);
  if (common.empty()) throw std::runtime_error("align_domains: no common users");

  auto keep_common = [&](const RatingsDataset& ds) {
    std::vector<std::size_t> kept;
    for (std::size_t i = 0; i < ds.triples.size(); ++i)
      if (common.count(ds.user_ids[ds.triples[i].user])) kept.push_back(i);
    return kept;
  };
  std::vector<std::size_t> ks = keep_common(src), kt = keep_common(tgt);

  // 2. item filter: items need >= min_ratings among common-user ratings
  auto filter_items = [&](const RatingsDataset& ds, std::vector<std::size_t>& kept) {
    std::vector<std::size_t> item_counts(ds.num_items(), 0);
    for (auto i : kept) ++item_counts[ds.triples[i].item];
    std::vector<std::size_t> out;
    for (auto i : kept)
      if (item_counts[ds.triples[i].item] >= min_ratings) out.push_back(i);
    kept = std::move(out);
  };
  filter_items(src, ks);
  filter_items(tgt, kt);

  // 3. user filter: a user must survive in both domains with >= min_ratings total
  std::unordered_map<std::string, std::size_t> ucount_s, ucount_t;
  for (auto i : ks) ++ucount_s[src.user_ids[src.triples[i].user]];
  for (auto i : kt) ++ucount_t[tgt.user_ids[tgt.triples[i].user]];
  std::unordered_set<std::string> final_users;
  for (const auto& [u, cs] : ucount_s) {
    auto it = ucount_t.find(u);
    if (it != ucount_t.end() && cs + it->second >= min_ratings) final_users.insert(u);
  }
  if (final_users.empty()) throw std::runtime_error("align_domains: all users filtered out");

  auto keep_final = [&](const RatingsDataset& ds, std::vector<std::size_t>& kept) {
    std::vector<std::size_t> out;
    for (auto i : kept)
      if (final_users.count(ds.user_ids[ds.triples[i].user])) out.push_back(i);
    kept = std::move(out);
  };
  keep_final(src, ks);
  keep_final(tgt, kt);
  if (ks.empty() || kt.empty())
    throw std::runtime_error("align_domains: a domain was emptied by filtering");

  // dense reindex; source items first in the unified item space
  CrossDomainDataset out;
  out.gamma_min = std::min(src.gamma_min, tgt.gamma_min);
  out.gamma_max = std::max(src.gamma_max, tgt.gamma_max);

  std::unordered_map<std::string, std::uint32_t> umap;
  auto user_of = [&](const std::string& id) {
    auto [it, fresh] = umap.try_emplace(id, static_cast<std::uint32_t>(out.user_ids.size()));
    if (fresh) out.user_ids.push_back(id);
    return it->second;
  };
  std::unordered_map<std::string, std::uint32_t> smap, tmap;

  for (auto i : ks) {
    const Rating& r = src.triples[i];
    auto [it, fresh] =
        smap.try_emplace(src.item_ids[r.item], static_cast<std::uint32_t>(out.source_item_ids.size()));
    if (fresh) out.source_item_ids.push_back(src.item_ids[r.item]);
    out.triples.push_back({user_of(src.user_ids[r.user]), it->second, r.value, Domain::Source});
  }
  const auto n_s = static_cast<std::uint32_t>(out.source_item_ids.size());
  for (auto i : kt) {
    const Rating& r = tgt.triples[i];
    auto [it, fresh] =
        tmap.try_emplace(tgt.item_ids[r.item], static_cast<std::uint32_t>(out.target_item_ids.size()));
    if (fresh) out.target_item_ids.push_back(tgt.item_ids[r.item]);
    out.triples.push_back(
        {user_of(tgt.user_ids[r.user]), n_s + it->second, r.value, Domain::Target});
  }
  return out;
}

void split(CrossDomainDataset& ds, SplitFractions f, std::uint64_t seed) {
  if (std::abs(f.train + f.validation + f.test - 1.0) > 1e-12)
    throw std::invalid_argument("split: fractions must sum to 1");

  std::mt19937_64 rng(seed);
  const std::size_t n_s = ds.num_source_items();

  std::vector<std::size_t> tgt_idx;
  for (std::size_t i = 0; i < ds.triples.size(); ++i) {
    ds.triples[i].label = SplitLabel::Train;
    ds.triples[i].removed = false;
    if (ds.triples[i].domain == Domain::Target) tgt_idx.push_back(i);
  }
  if (tgt_idx.empty()) throw std::runtime_error("split: no target ratings");

  // Pre-assign one uniformly chosen rating per user and per target item to
  // train, then sample validation/test from the remainder.
  std::vector<std::vector<std::size_t>> by_user(ds.num_users());
  std::vector<std::vector<std::size_t>> by_item(ds.num_target_items());
  for (auto i : tgt_idx) {
    by_user[ds.triples[i].user].push_back(i);
    by_item[ds.triples[i].item - n_s].push_back(i);
  }
  std::vector<char> pinned(ds.triples.size(), 0);
  auto pin_one = [&](const std::vector<std::size_t>& group) {
    if (group.empty()) return;
    for (auto i : group)
      if (pinned[i]) return;
    std::uniform_int_distribution<std::size_t> pick(0, group.size() - 1);
    pinned[group[pick(rng)]] = 1;
  };
  for (auto& g : by_user) pin_one(g);
  for (auto& g : by_item) pin_one(g);

  std::vector<std::size_t> free_idx;
  for (auto i : tgt_idx)
    if (!pinned[i]) free_idx.push_back(i);
  std::shuffle(free_idx.begin(), free_idx.end(), rng);

  const auto n = tgt_idx.size();
  const auto n_test = static_cast<std::size_t>(std::llround(f.test * static_cast<double>(n)));
  const auto n_val =
      static_cast<std::size_t>(std::llround(f.validation * static_cast<double>(n)));
  std::size_t pos = 0;
  for (; pos < free_idx.size() && pos < n_test; ++pos)
    ds.triples[free_idx[pos]].label = SplitLabel::Test;
  for (std::size_t v = 0; pos < free_idx.size() && v < n_val; ++pos, ++v)
    ds.triples[free_idx[pos]].label = SplitLabel::Validation;
  // everything else (pinned + remainder) stays train

  ds.split_applied = true;
  ds.split_seed = seed;
}

void sparsify(CrossDomainDataset& ds, double K, std::uint64_t seed) {
  if (!ds.split_applied) throw std::logic_error("sparsify: split not applied");
  if (K < 0.0 || K >= 100.0) throw std::invalid_argument("sparsify: K must be in [0,100)");
  std::vector<std::size_t> train_idx;
  for (std::size_t i = 0; i < ds.triples.size(); ++i) {
    const auto& t = ds.triples[i];
    if (t.domain == Domain::Target && ds.trains(t)) train_idx.push_back(i);
  }
  const auto n_remove =
      static_cast<std::size_t>(K / 100.0 * static_cast<double>(train_idx.size()));
  std::mt19937_64 rng(seed);
  std::shuffle(train_idx.begin(), train_idx.end(), rng);
  for (std::size_t i = 0; i < n_remove; ++i) ds.triples[train_idx[i]].removed = true;
}

std::vector<std::uint32_t> cold_start_users(const CrossDomainDataset& ds) {
  if (!ds.split_applied) throw std::logic_error("cold_start_users: split not applied");
  auto counts = ds.target_train_counts();
  std::vector<std::uint32_t> users;
  for (std::uint32_t u = 0; u < counts.size(); ++u)
    if (counts[u] < 5) users.push_back(u);
  return users;
}

std::vector<std::uint32_t> full_cold_start(CrossDomainDataset& ds, double K,
                                           std::uint64_t seed) {
  if (!ds.split_applied) throw std::logic_error("full_cold_start: split not applied");
  if (K < 0.0 || K >= 100.0) throw std::invalid_argument("full_cold_start: K must be in [0,100)");
  const auto n_users =
      static_cast<std::size_t>(K / 100.0 * static_cast<double>(ds.num_users()));
  std::vector<std::uint32_t> all(ds.num_users());
  std::iota(all.begin(), all.end(), 0u);
  std::mt19937_64 rng(seed);
  std::shuffle(all.begin(), all.end(), rng);
  all.resize(n_users);
  std::sort(all.begin(), all.end());

  std::vector<char> chosen(ds.num_users(), 0);
  for (auto u : all) chosen[u] = 1;
  for (auto& t : ds.triples)
    if (t.domain == Domain::Target && t.label == SplitLabel::Train && chosen[t.user])
      t.removed = true;
  ds.full_cold_users = all;
  return all;
}

void apply_protocol(CrossDomainDataset& ds, const ProtocolSpec& protocol) {
  ds.protocol = protocol;
  switch (protocol.kind) {
    case ProtocolSpec::Kind::Sparse:
    case ProtocolSpec::Kind::ColdStart:
      sparsify(ds, protocol.K, protocol.seed);
      break;
    case ProtocolSpec::Kind::FullColdStart:
      full_cold_start(ds, protocol.K, protocol.seed);
      break;
  }
}

void save_manifest(const CrossDomainDataset& ds, const std::string& path) {
  nlohmann::json j;
  j["version"] = 1;
  j["users"] = ds.user_ids;
  j["source_items"] = ds.source_item_ids;
  j["target_items"] = ds.target_item_ids;
  j["gamma_min"] = ds.gamma_min;
  j["gamma_max"] = ds.gamma_max;
  j["split_applied"] = ds.split_applied;
  j["split_seed"] = ds.split_seed;
  j["protocol"] = {{"kind", to_string(ds.protocol.kind)},
                   {"K", ds.protocol.K},
                   {"seed", ds.protocol.seed}};
  j["full_cold_users"] = ds.full_cold_users;
  std::vector<std::uint32_t> users, items;
  std::vector<double> values;
  std::vector<int> domains, labels, removed;
  for (const auto& t : ds.triples) {
    users.push_back(t.user);
    items.push_back(t.item);
    values.push_back(t.value);
    domains.push_back(static_cast<int>(t.domain));
    labels.push_back(static_cast<int>(t.label));
    removed.push_back(t.removed ? 1 : 0);
  }
  j["triples"] = {{"user", users}, {"item", items}, {"value", values},
                  {"domain", domains}, {"label", labels}, {"removed", removed}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_manifest: cannot write " + path);
  out << j.dump(2) << "\n";
}

CrossDomainDataset load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_manifest: cannot open " + path);
  nlohmann::json j;
  in >> j;
  CrossDomainDataset ds;
  ds.user_ids = j.at("users").get<std::vector<std::string>>();
  ds.source_item_ids = j.at("source_items").get<std::vector<std::string>>();
  ds.target_item_ids = j.at("target_items").get<std::vector<std::string>>();
  ds.gamma_min = j.at("gamma_min").get<double>();
  ds.gamma_max = j.at("gamma_max").get<double>();
  ds.split_applied = j.at("split_applied").get<bool>();
  ds.split_seed = j.at("split_seed").get<std::uint64_t>();
  const auto& p = j.at("protocol");
  ds.protocol.kind = protocol_kind_from_string(p.at("kind").get<std::string>());
  ds.protocol.K = p.at("K").get<double>();
  ds.protocol.seed = p.at("seed").get<std::uint64_t>();
  ds.full_cold_users = j.at("full_cold_users").get<std::vector<std::uint32_t>>();
  const auto& t = j.at("triples");
  const auto users = t.at("user").get<std::vector<std::uint32_t>>();
  const auto items = t.at("item").get<std::vector<std::uint32_t>>();
  const auto values = t.at("value").get<std::vector<double>>();
  const auto domains = t.at("domain").get<std::vector<int>>();
  const auto labels = t.at("label").get<std::vector<int>>();
  const auto removed = t.at("removed").get<std::vector<int>>();
  for (std::size_t i = 0; i < users.size(); ++i)
    ds.triples.push_back({users[i], items[i], values[i], static_cast<Domain>(domains[i]),
                          static_cast<SplitLabel>(labels[i]), removed[i] != 0});
  return ds;
}

}  // namespace crossrec
