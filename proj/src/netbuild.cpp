#include "countnet/netbuild.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "countnet/math.hpp"

namespace countnet {

namespace {

std::unordered_map<std::string, int> roster_index(
    const std::vector<std::string>& roster) {
  std::unordered_map<std::string, int> idx;
  idx.reserve(roster.size());
  for (std::size_t i = 0; i < roster.size(); ++i) {
    if (!idx.emplace(roster[i], static_cast<int>(i)).second) {
      throw ValidationError("duplicate scholar id '" + roster[i] + "' on the roster");
    }
  }
  return idx;
}

void check_window(Period w) {
  if (w.end < w.start) {
    throw ValidationError("period end " + std::to_string(w.end) +
                          " precedes start " + std::to_string(w.start));
  }
}

}  // namespace

std::vector<std::string> roster_ids(const std::vector<ScholarProfile>& profiles) {
  std::vector<std::string> ids;
  ids.reserve(profiles.size());
  for (const auto& p : profiles) {
    if (p.id.empty()) throw ValidationError("scholar with empty id");
    ids.push_back(p.id);
  }
  roster_index(ids);  // throws on duplicates
  return ids;
}

std::vector<PublicationRecord> filter_to_roster(
    const std::vector<PublicationRecord>& records,
    const std::vector<std::string>& roster) {
  const auto idx = roster_index(roster);
  std::vector<PublicationRecord> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    PublicationRecord kept = rec;
    kept.authors.clear();
    for (const auto& a : rec.authors) {
      if (idx.count(a)) kept.authors.push_back(a);
    }
    if (!kept.authors.empty()) out.push_back(std::move(kept));
  }
  return out;
}

InteractionNetwork build_adjacency(const std::vector<PublicationRecord>& records,
                                   const std::vector<std::string>& roster,
                                   Period window, int min_joint_papers) {
  check_window(window);
  if (min_joint_papers < 1) {
    throw ValidationError("min_joint_papers must be >= 1");
  }
  const auto idx = roster_index(roster);
  const int n = static_cast<int>(roster.size());

  std::unordered_set<std::string> seen_papers;
  std::map<std::pair<int, int>, int> joint;  // ordered (lo, hi) -> paper count
  for (const auto& rec : records) {
    if (!seen_papers.insert(rec.paper_id).second) {
      throw ValidationError("duplicate paper id '" + rec.paper_id + "'");
    }
    if (rec.year < window.start || rec.year > window.end) continue;

    std::vector<int> members;
    members.reserve(rec.authors.size());
    for (const auto& a : rec.authors) {
      const auto it = idx.find(a);
      if (it == idx.end()) {
        throw ValidationError("paper '" + rec.paper_id + "' lists unknown scholar '" +
                              a + "'; filter records to the roster first");
      }
      members.push_back(it->second);
    }
    std::sort(members.begin(), members.end());
    if (std::adjacent_find(members.begin(), members.end()) != members.end()) {
      throw ValidationError("paper '" + rec.paper_id + "' lists an author twice");
    }
    for (std::size_t a = 0; a < members.size(); ++a) {
      for (std::size_t b = a + 1; b < members.size(); ++b) {
        ++joint[{members[a], members[b]}];
      }
    }
  }

  InteractionNetwork w(n);
  for (const auto& [pair, count] : joint) {
    if (count >= min_joint_papers) {
      w.push_entry(pair.first, pair.second, 1.0);
      w.push_entry(pair.second, pair.first, 1.0);
    }
  }
  w.sort_rows();
  return w;
}

Eigen::VectorXi outcome_counts(const std::vector<PublicationRecord>& records,
                               const std::vector<std::string>& roster,
                               Period period) {
  check_window(period);
  const auto idx = roster_index(roster);
  Eigen::VectorXi y = Eigen::VectorXi::Zero(static_cast<int>(roster.size()));
  std::unordered_set<std::string> seen;
  for (const auto& rec : records) {
    if (!seen.insert(rec.paper_id).second) {
      throw ValidationError("duplicate paper id '" + rec.paper_id + "'");
    }
    if (rec.year < period.start || rec.year > period.end) continue;
    for (const auto& a : rec.authors) {
      const auto it = idx.find(a);
      if (it != idx.end()) ++y[it->second];
    }
  }
  return y;
}

Eigen::VectorXd covid_index(const std::vector<PublicationRecord>& records,
                            const std::vector<std::string>& roster, Period window,
                            double threshold) {
  check_window(window);
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ValidationError("covid_index: threshold must lie in [0, 1]");
  }
  const auto idx = roster_index(roster);
  const int n = static_cast<int>(roster.size());
  Eigen::VectorXd hits = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(n);
  for (const auto& rec : records) {
    if (rec.year < window.start || rec.year > window.end) continue;
    for (const auto& a : rec.authors) {
      const auto it = idx.find(a);
      if (it == idx.end()) continue;
      total[it->second] += 1.0;
      if (rec.covid_topic_prob > threshold) hits[it->second] += 1.0;
    }
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (total[i] > 0.0) out[i] = hits[i] / total[i];
  }
  return out;
}

namespace {

int ranking_code(const std::string& bucket, const std::string& scholar) {
  static const std::vector<std::string> kBuckets = {"Top10", "11-20", "21-30",
                                                    "31-40", "41-50"};
  for (std::size_t k = 0; k < kBuckets.size(); ++k) {
    if (bucket == kBuckets[k]) return static_cast<int>(k);
  }
  throw ValidationError("scholar '" + scholar + "' has unknown ranking bucket '" +
                        bucket + "'");
}

}  // namespace

std::vector<ScholarFeatures> derive_features(
    const std::vector<ScholarProfile>& profiles,
    const std::vector<PublicationRecord>& records, Period period,
    int lookback_years) {
  check_window(period);
  if (lookback_years < 1) throw ValidationError("lookback_years must be >= 1");
  const std::vector<std::string> roster = roster_ids(profiles);
  const auto idx = roster_index(roster);
  const int n = static_cast<int>(roster.size());

  // Papers per scholar in the lookback window before the period, and
  // lifetime papers strictly before the period.
  std::vector<int> window_pubs(static_cast<std::size_t>(n), 0);
  std::vector<int> lifetime_pubs(static_cast<std::size_t>(n), 0);
  std::unordered_set<std::string> seen;
  for (const auto& rec : records) {
    if (!seen.insert(rec.paper_id).second) {
      throw ValidationError("duplicate paper id '" + rec.paper_id + "'");
    }
    for (const auto& a : rec.authors) {
      const auto it = idx.find(a);
      if (it == idx.end()) continue;
      if (rec.year < period.start) ++lifetime_pubs[static_cast<std::size_t>(it->second)];
      if (rec.year >= period.start - lookback_years && rec.year <= period.start - 1) {
        ++window_pubs[static_cast<std::size_t>(it->second)];
      }
    }
  }

  // Department codes by first appearance, deterministic in roster order.
  std::unordered_map<std::string, int> dept_codes;

  std::vector<ScholarFeatures> out;
  out.reserve(profiles.size());
  for (int i = 0; i < n; ++i) {
    const ScholarProfile& p = profiles[static_cast<std::size_t>(i)];
    ScholarFeatures f;
    f.id = p.id;
    const auto dept = dept_codes.emplace(p.department,
                                         static_cast<int>(dept_codes.size()));
    f.department = dept.first->second;
    f.ranking_bucket = ranking_code(p.ranking_bucket, p.id);
    f.female = p.female;
    f.african_american = p.african_american;
    f.experience = std::max(0, period.start - p.first_pub_year);
    // cumulative citations at the latest year not past the period start
    f.citations = 0.0;
    for (const auto& [year, total] : p.citations_by_year) {
      if (year <= period.start) f.citations = total;
    }
    f.avg_pubs = static_cast<double>(window_pubs[static_cast<std::size_t>(i)]) /
                 static_cast<double>(lookback_years);
    f.total_pubs = static_cast<double>(lifetime_pubs[static_cast<std::size_t>(i)]);
    f.fields = p.fields;
    std::sort(f.fields.begin(), f.fields.end());
    f.fields.erase(std::unique(f.fields.begin(), f.fields.end()), f.fields.end());
    out.push_back(std::move(f));
  }
  return out;
}

namespace {

// Bucket index of v given ascending cuts: 0 for v < cuts[0] (the reference),
// k for cuts[k-1] <= v < cuts[k], cuts.size() above the last cut.
int bucket_of(double v, const std::vector<double>& cuts) {
  int b = 0;
  for (double c : cuts) {
    if (v >= c) ++b;
  }
  return b;
}

std::string range_label(const std::string& prefix, const std::vector<double>& cuts,
                        int bucket) {
  auto fmt = [](double v) {
    if (v == std::floor(v)) return std::to_string(static_cast<long long>(v));
    std::string s = std::to_string(v);
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
  };
  const double lo = cuts[static_cast<std::size_t>(bucket - 1)];
  if (bucket == static_cast<int>(cuts.size())) {
    return prefix + "_" + fmt(lo) + "_plus";
  }
  const double hi = cuts[static_cast<std::size_t>(bucket)];
  // integer cuts read as closed ranges: cuts {2,5} label "2_4"
  if (hi == std::floor(hi) && lo == std::floor(lo)) {
    return prefix + "_" + fmt(lo) + "_" + fmt(hi - 1);
  }
  return prefix + "_" + fmt(lo) + "_" + fmt(hi);
}

void validate_cuts(const std::vector<double>& cuts, const std::string& what) {
  if (cuts.empty()) {
    throw ValidationError("bucket config for " + what + " has no cuts");
  }
  for (std::size_t k = 1; k < cuts.size(); ++k) {
    if (!(cuts[k] > cuts[k - 1])) {
      throw ValidationError("bucket cuts for " + what + " must be strictly ascending");
    }
  }
}

}  // namespace

CovariateBuild build_covariates(const std::vector<ScholarFeatures>& features,
                                const BucketConfig& buckets,
                                const InteractionNetwork& g,
                                const std::optional<Eigen::VectorXd>& covid) {
  const int n = static_cast<int>(features.size());
  if (n == 0) throw ValidationError("build_covariates: no scholars");
  if (g.size() != n) {
    throw ValidationError("build_covariates: network size does not match the roster");
  }
  validate_cuts(buckets.productivity.cuts, "productivity");
  validate_cuts(buckets.citations.cuts, "citations");
  validate_cuts(buckets.experience.cuts, "experience");
  if (covid && covid->size() != n) {
    throw ValidationError("build_covariates: covid index has the wrong length");
  }

  std::vector<Eigen::VectorXd> cols;
  std::vector<std::string> labels;
  auto add_bucket_dummies = [&](const std::string& prefix,
                                const BucketSpec& spec, auto getter) {
    const int n_buckets = static_cast<int>(spec.cuts.size());
    for (int b = 1; b <= n_buckets; ++b) {
      Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < n; ++i) {
        if (bucket_of(getter(features[static_cast<std::size_t>(i)]), spec.cuts) == b) {
          col[i] = 1.0;
        }
      }
      cols.push_back(std::move(col));
      labels.push_back(range_label(prefix, spec.cuts, b));
    }
  };

  add_bucket_dummies("pubs", buckets.productivity,
                     [](const ScholarFeatures& f) { return f.avg_pubs; });
  add_bucket_dummies("cites", buckets.citations,
                     [](const ScholarFeatures& f) { return f.citations; });
  add_bucket_dummies("exp", buckets.experience,
                     [](const ScholarFeatures& f) { return f.experience; });

  {
    Eigen::VectorXd female = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd aa = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (features[static_cast<std::size_t>(i)].female) female[i] = 1.0;
      if (features[static_cast<std::size_t>(i)].african_american) aa[i] = 1.0;
    }
    cols.push_back(std::move(female));
    labels.push_back("female");
    cols.push_back(std::move(aa));
    labels.push_back("african_american");
  }

  // Primary-field dummies with the most common field as the reference.
  {
    std::map<std::string, int> counts;
    for (const auto& f : features) {
      if (!f.fields.empty()) ++counts[f.fields.front()];
    }
    if (counts.size() > 1) {
      std::string ref = counts.begin()->first;
      for (const auto& [field, cnt] : counts) {
        if (cnt > counts[ref]) ref = field;
      }
      for (const auto& [field, cnt] : counts) {
        if (field == ref) continue;
        Eigen::VectorXd col = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < n; ++i) {
          const auto& ff = features[static_cast<std::size_t>(i)].fields;
          if (!ff.empty() && ff.front() == field) col[i] = 1.0;
        }
        cols.push_back(std::move(col));
        labels.push_back("field_" + field);
      }
    }
  }

  if (covid) {
    cols.push_back(*covid);
    labels.push_back("covid_share");
  }

  CovariateBuild out;
  const int k = static_cast<int>(cols.size());
  out.x.resize(n, k);
  for (int c = 0; c < k; ++c) out.x.col(c) = cols[static_cast<std::size_t>(c)];
  out.labels = labels;
  out.z.resize(n, 2 * k);
  out.z.leftCols(k) = out.x;
  out.z.rightCols(k) = g.multiply(out.x);
  out.z_labels = labels;
  for (const auto& l : labels) out.z_labels.push_back("g:" + l);
  return out;
}

}  // namespace countnet
