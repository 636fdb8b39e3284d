#include "countnet/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <tuple>

#include "countnet/math.hpp"

namespace countnet {
namespace io {

namespace {

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in.is_open()) {
    throw ValidationError("cannot open file: " + path);
  }
  return in;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out.is_open()) {
    throw ValidationError("cannot open file for writing: " + path);
  }
  return out;
}

// One CSV record, honoring quoted fields with "" escapes. Quotes only matter
// at the start of a field; embedded newlines are not supported.
std::vector<std::string> split_csv_line(const std::string& line,
                                        const std::string& path, int line_no) {
  std::vector<std::string> out;
  std::string cell;
  bool quoted = false;
  bool at_start = true;
  for (std::size_t k = 0; k < line.size(); ++k) {
    char c = line[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          cell += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        cell += c;
      }
      continue;
    }
    if (at_start && c == '"') {
      quoted = true;
      at_start = false;
      continue;
    }
    if (c == ',') {
      out.push_back(cell);
      cell.clear();
      at_start = true;
      continue;
    }
    cell += c;
    at_start = false;
  }
  if (quoted) {
    throw ValidationError(path + ":" + std::to_string(line_no) +
                          ": unterminated quote");
  }
  out.push_back(cell);
  return out;
}

std::string cell_context(const std::string& where, const std::string& value) {
  return where + ": '" + value + "'";
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) {
      throw std::invalid_argument(s);
    }
    return v;
  } catch (const std::exception&) {
    throw ValidationError(cell_context(where + ": expected a number", s));
  }
}

int parse_int(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) {
      throw std::invalid_argument(s);
    }
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ValidationError(cell_context(where + ": expected an integer", s));
  }
}

bool parse_bool(const std::string& s, const std::string& where) {
  if (s == "0" || s == "false") return false;
  if (s == "1" || s == "true") return true;
  throw ValidationError(cell_context(where + ": expected 0/1/true/false", s));
}

// "a;b;c" -> {"a", "b", "c"}; the empty string is an empty list.
std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  if (s.empty()) {
    return out;
  }
  std::size_t start = 0;
  while (true) {
    std::size_t sep = s.find(';', start);
    if (sep == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, sep - start));
    start = sep + 1;
  }
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t k = 0; k < items.size(); ++k) {
    if (k > 0) out += ';';
    out += items[k];
  }
  return out;
}

// "2018:1200;2019:1500" -> {{2018, 1200}, {2019, 1500}}
std::map<int, double> parse_year_values(const std::string& s,
                                        const std::string& where) {
  std::map<int, double> out;
  for (const std::string& pair : split_list(s)) {
    std::size_t sep = pair.find(':');
    if (sep == std::string::npos) {
      throw ValidationError(cell_context(where + ": expected year:value", pair));
    }
    int year = parse_int(pair.substr(0, sep), where);
    double value = parse_double(pair.substr(sep + 1), where);
    if (!out.emplace(year, value).second) {
      throw ValidationError(where + ": duplicate year " + std::to_string(year));
    }
  }
  return out;
}

std::string row_where(const std::string& path, std::size_t row,
                      const std::string& column) {
  return path + ":row " + std::to_string(row + 1) + ":" + column;
}

}  // namespace

std::string format_double(double v) {
  // Shortest representation that still parses back to the same double.
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return std::string(buf);
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t k = 0; k < header.size(); ++k) {
    if (header[k] == name) {
      return static_cast<int>(k);
    }
  }
  return -1;
}

int CsvTable::require_column(const std::string& name) const {
  int k = column(name);
  if (k < 0) {
    throw ValidationError("missing column '" + name + "'");
  }
  return k;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in = open_input(path);
  CsvTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> cells = split_csv_line(line, path, line_no);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": expected " +
                            std::to_string(table.header.size()) +
                            " cells, found " + std::to_string(cells.size()));
    }
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) {
    throw ValidationError(path + ": empty file");
  }
  return table;
}

std::vector<ScholarProfile> read_scholars(const std::string& path) {
  CsvTable t = read_csv(path);
  int c_id = t.require_column("id");
  int c_name = t.require_column("name");
  int c_dept = t.require_column("department");
  int c_rank = t.require_column("ranking_bucket");
  int c_female = t.require_column("female");
  int c_aa = t.require_column("african_american");
  int c_first = t.require_column("first_pub_year");
  int c_cites = t.require_column("citations_by_year");
  int c_fields = t.require_column("fields");

  std::vector<ScholarProfile> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::vector<std::string>& row = t.rows[r];
    ScholarProfile p;
    p.id = row[c_id];
    if (p.id.empty()) {
      throw ValidationError(row_where(path, r, "id") + ": empty id");
    }
    p.name = row[c_name];
    p.department = row[c_dept];
    p.ranking_bucket = row[c_rank];
    p.female = parse_bool(row[c_female], row_where(path, r, "female"));
    p.african_american =
        parse_bool(row[c_aa], row_where(path, r, "african_american"));
    p.first_pub_year =
        parse_int(row[c_first], row_where(path, r, "first_pub_year"));
    p.citations_by_year =
        parse_year_values(row[c_cites], row_where(path, r, "citations_by_year"));
    p.fields = split_list(row[c_fields]);
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PublicationRecord> read_publications(const std::string& path) {
  CsvTable t = read_csv(path);
  int c_paper = t.require_column("paper_id");
  int c_year = t.require_column("year");
  int c_authors = t.require_column("author_ids");
  int c_covid = t.column("covid_topic_prob");  // optional

  std::vector<PublicationRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::vector<std::string>& row = t.rows[r];
    PublicationRecord rec;
    rec.paper_id = row[c_paper];
    if (rec.paper_id.empty()) {
      throw ValidationError(row_where(path, r, "paper_id") + ": empty id");
    }
    rec.year = parse_int(row[c_year], row_where(path, r, "year"));
    rec.authors = split_list(row[c_authors]);
    if (rec.authors.empty()) {
      throw ValidationError(row_where(path, r, "author_ids") + ": no authors");
    }
    if (c_covid >= 0 && !row[c_covid].empty()) {
      rec.covid_topic_prob =
          parse_double(row[c_covid], row_where(path, r, "covid_topic_prob"));
      if (rec.covid_topic_prob < 0.0 || rec.covid_topic_prob > 1.0) {
        throw ValidationError(row_where(path, r, "covid_topic_prob") +
                              ": must lie in [0, 1]");
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

void write_edge_list(const std::string& path, const InteractionNetwork& g) {
  std::ofstream out = open_output(path);
  out << "n " << g.size() << "\n";
  for (int i = 0; i < g.size(); ++i) {
    for (const auto& [j, w] : g.row(i)) {
      out << i << " " << j << " " << format_double(w) << "\n";
    }
  }
}

InteractionNetwork read_edge_list(const std::string& path) {
  std::ifstream in = open_input(path);
  std::string tag;
  int n = 0;
  if (!(in >> tag >> n) || tag != "n") {
    throw ValidationError(path + ": expected a first line 'n <size>'");
  }
  if (n < 0) {
    throw ValidationError(path + ": negative network size");
  }
  std::vector<std::tuple<int, int, double>> triplets;
  int i = 0;
  int j = 0;
  double w = 0.0;
  while (in >> i >> j >> w) {
    triplets.emplace_back(i, j, w);
  }
  if (!in.eof()) {
    throw ValidationError(path + ": malformed edge line");
  }
  try {
    return InteractionNetwork::from_triplets(n, triplets);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>& labels) {
  if (static_cast<int>(labels.size()) != m.cols()) {
    throw ValidationError("matrix has " + std::to_string(m.cols()) +
                          " columns but " + std::to_string(labels.size()) +
                          " labels");
  }
  std::ofstream out = open_output(path);
  for (std::size_t k = 0; k < labels.size(); ++k) {
    if (k > 0) out << ",";
    out << csv_escape(labels[k]);
  }
  out << "\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out << ",";
      out << format_double(m(r, c));
    }
    out << "\n";
  }
}

std::pair<Eigen::MatrixXd, std::vector<std::string>> read_matrix_csv(
    const std::string& path) {
  CsvTable t = read_csv(path);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.rows.size()),
                    static_cast<Eigen::Index>(t.header.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    for (std::size_t c = 0; c < t.header.size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_double(t.rows[r][c], row_where(path, r, t.header[c]));
    }
  }
  return {std::move(m), t.header};
}

void write_outcomes_csv(const std::string& path, const std::vector<std::string>& ids,
                        const Eigen::VectorXi& y) {
  if (static_cast<Eigen::Index>(ids.size()) != y.size()) {
    throw ValidationError("outcome vector and id list differ in length");
  }
  std::ofstream out = open_output(path);
  out << "id,y\n";
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    out << csv_escape(ids[static_cast<std::size_t>(i)]) << "," << y[i] << "\n";
  }
}

Eigen::VectorXi read_outcomes_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  int c_y = t.require_column("y");
  Eigen::VectorXi y(static_cast<Eigen::Index>(t.rows.size()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    y[static_cast<Eigen::Index>(r)] = parse_int(t.rows[r][c_y],
                                                row_where(path, r, "y"));
    if (y[static_cast<Eigen::Index>(r)] < 0) {
      throw ValidationError(row_where(path, r, "y") + ": negative count");
    }
  }
  return y;
}

void write_features_csv(const std::string& path,
                        const std::vector<ScholarFeatures>& features) {
  std::ofstream out = open_output(path);
  out << "id,department,ranking_bucket,female,african_american,experience,"
         "citations,avg_pubs,total_pubs,fields\n";
  for (const ScholarFeatures& f : features) {
    out << csv_escape(f.id) << "," << f.department << "," << f.ranking_bucket
        << "," << (f.female ? 1 : 0) << "," << (f.african_american ? 1 : 0)
        << "," << format_double(f.experience) << "," << format_double(f.citations)
        << "," << format_double(f.avg_pubs) << "," << format_double(f.total_pubs)
        << "," << csv_escape(join_list(f.fields)) << "\n";
  }
}

std::vector<ScholarFeatures> read_features_csv(const std::string& path) {
  CsvTable t = read_csv(path);
  int c_id = t.require_column("id");
  int c_dept = t.require_column("department");
  int c_rank = t.require_column("ranking_bucket");
  int c_female = t.require_column("female");
  int c_aa = t.require_column("african_american");
  int c_exp = t.require_column("experience");
  int c_cites = t.require_column("citations");
  int c_avg = t.require_column("avg_pubs");
  int c_total = t.require_column("total_pubs");
  int c_fields = t.require_column("fields");

  std::vector<ScholarFeatures> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::vector<std::string>& row = t.rows[r];
    ScholarFeatures f;
    f.id = row[c_id];
    f.department = parse_int(row[c_dept], row_where(path, r, "department"));
    f.ranking_bucket =
        parse_int(row[c_rank], row_where(path, r, "ranking_bucket"));
    f.female = parse_bool(row[c_female], row_where(path, r, "female"));
    f.african_american =
        parse_bool(row[c_aa], row_where(path, r, "african_american"));
    f.experience = parse_double(row[c_exp], row_where(path, r, "experience"));
    f.citations = parse_double(row[c_cites], row_where(path, r, "citations"));
    f.avg_pubs = parse_double(row[c_avg], row_where(path, r, "avg_pubs"));
    f.total_pubs = parse_double(row[c_total], row_where(path, r, "total_pubs"));
    f.fields = split_list(row[c_fields]);
    out.push_back(std::move(f));
  }
  return out;
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out = open_output(path);
  out << content;
}

std::string read_text(const std::string& path) {
  std::ifstream in = open_input(path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace io
}  // namespace countnet
