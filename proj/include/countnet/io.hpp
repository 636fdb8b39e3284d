#ifndef COUNTNET_IO_HPP
#define COUNTNET_IO_HPP

// File formats. CSV files carry a header row; list-valued cells use ';' as
// the inner separator and year:value pairs use ':'. Networks live in a plain
// text edge list: a first line "n <size>", then one "i j weight" line per
// entry with 0-based indices. Doubles are written with 17 significant digits
// so a rerun reproduces files byte for byte.

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "countnet/formation.hpp"
#include "countnet/netbuild.hpp"
#include "countnet/network.hpp"

namespace countnet {
namespace io {

std::string format_double(double v);

// Quotes a cell when it contains a comma, quote or newline.
std::string csv_escape(const std::string& s);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;             // -1 when absent
  int require_column(const std::string& name) const;     // throws when absent
};

CsvTable read_csv(const std::string& path);

// scholars.csv: id,name,department,ranking_bucket,female,african_american,
//               first_pub_year,citations_by_year,fields
std::vector<ScholarProfile> read_scholars(const std::string& path);

// publications.csv: paper_id,year,author_ids[,covid_topic_prob]
std::vector<PublicationRecord> read_publications(const std::string& path);

void write_edge_list(const std::string& path, const InteractionNetwork& g);
InteractionNetwork read_edge_list(const std::string& path);

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& labels);
std::pair<Eigen::MatrixXd, std::vector<std::string>> read_matrix_csv(
    const std::string& path);

// outcomes.csv: id,y
void write_outcomes_csv(const std::string& path, const std::vector<std::string>& ids,
                        const Eigen::VectorXi& y);
Eigen::VectorXi read_outcomes_csv(const std::string& path);

void write_features_csv(const std::string& path,
                        const std::vector<ScholarFeatures>& features);
std::vector<ScholarFeatures> read_features_csv(const std::string& path);

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

}  // namespace io
}  // namespace countnet

#endif
