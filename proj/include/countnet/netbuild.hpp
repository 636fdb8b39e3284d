#ifndef COUNTNET_NETBUILD_HPP
#define COUNTNET_NETBUILD_HPP

// Co-authorship networks and scholar covariates from publication records.
// Two scholars are linked when they share at least min_joint_papers distinct
// papers inside the window; covariates are bucket dummies over productivity,
// citations and experience, demographics, optional primary-field dummies and
// an optional topical-share column.

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "countnet/formation.hpp"
#include "countnet/network.hpp"

namespace countnet {

struct PublicationRecord {
  std::string paper_id;
  int year = 0;
  std::vector<std::string> authors;
  double covid_topic_prob = 0.0;  // missing in the data maps to 0
};

struct ScholarProfile {
  std::string id;
  std::string name;
  std::string department;
  std::string ranking_bucket;  // one of Top10, 11-20, 21-30, 31-40, 41-50
  bool female = false;
  bool african_american = false;
  int first_pub_year = 0;
  std::map<int, double> citations_by_year;  // cumulative totals
  std::vector<std::string> fields;
};

struct Period {
  int start = 0;
  int end = 0;  // inclusive
};

// Roster ids in profile order; duplicate ids are rejected.
std::vector<std::string> roster_ids(const std::vector<ScholarProfile>& profiles);

// Drops authors that are not on the roster. Records left with no roster
// author are removed.
std::vector<PublicationRecord> filter_to_roster(
    const std::vector<PublicationRecord>& records,
    const std::vector<std::string>& roster);

// Symmetric 0/1 network over the roster: an edge wherever a pair co-authored
// at least min_joint_papers distinct papers within the window. Every author
// id must be on the roster; duplicate paper ids and duplicate authors on one
// paper are data errors.
InteractionNetwork build_adjacency(const std::vector<PublicationRecord>& records,
                                   const std::vector<std::string>& roster,
                                   Period window, int min_joint_papers);

// Distinct papers per scholar inside the period: the outcome variable.
Eigen::VectorXi outcome_counts(const std::vector<PublicationRecord>& records,
                               const std::vector<std::string>& roster,
                               Period period);

// Share of a scholar's papers in the window with topic probability above
// the threshold; 0 for scholars with no papers in the window.
Eigen::VectorXd covid_index(const std::vector<PublicationRecord>& records,
                            const std::vector<std::string>& roster, Period window,
                            double threshold);

struct BucketSpec {
  std::vector<double> cuts;  // ascending; values below cuts[0] are the reference
};

struct BucketConfig {
  BucketSpec productivity{{2.0, 5.0, 10.0}};
  BucketSpec citations{{100.0, 500.0, 1500.0}};
  BucketSpec experience{{5.0, 10.0, 20.0}};
};

// Raw per-scholar numbers entering buckets and the dyadic regression:
// experience at the period start, cumulative citations at the period start,
// mean yearly publications over the lookback window before the period.
std::vector<ScholarFeatures> derive_features(
    const std::vector<ScholarProfile>& profiles,
    const std::vector<PublicationRecord>& records, Period period,
    int lookback_years = 3);

struct CovariateBuild {
  Eigen::MatrixXd x;                 // own covariates, no intercept
  Eigen::MatrixXd z;                 // [x, g * x]
  std::vector<std::string> labels;   // one per x column
  std::vector<std::string> z_labels; // labels then "g:" + labels
};

// Dummy-codes the bucketed features and demographics, appends primary-field
// dummies when more than one field is present, plus the optional topical
// share column; z doubles every column with its neighbor average.
CovariateBuild build_covariates(const std::vector<ScholarFeatures>& features,
                                const BucketConfig& buckets,
                                const InteractionNetwork& g,
                                const std::optional<Eigen::VectorXd>& covid =
                                    std::nullopt);

}  // namespace countnet

#endif
