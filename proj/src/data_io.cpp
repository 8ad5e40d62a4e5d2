#include "aimh/data_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "aimh/rng.hpp"

namespace aimh {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool is_missing(const std::string& field) {
  const std::string f = lower(field);
  return f.empty() || f == "na" || f == "nan" || f == "null" || f == ".";
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) fields.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  CsvTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (table.header.empty())
      table.header = split_line(line);
    else
      table.rows.push_back(split_line(line));
  }
  if (table.header.empty()) throw std::runtime_error(path + " has no header row");
  return table;
}

// Accepts YYYY-MM, YYYY-MM-DD, YYYY/MM(...) and returns year*12 + (month-1).
long parse_month_index(const std::string& field, const std::string& path) {
  int year = 0, month = 0;
  char sep = 0;
  std::stringstream ss(field);
  if (!(ss >> year >> sep >> month) || (sep != '-' && sep != '/') || month < 1 ||
      month > 12)
    throw std::runtime_error(path + ": unparseable date '" + field + "'");
  return static_cast<long>(year) * 12 + (month - 1);
}

}  // namespace

bool Dataset::has_column(const std::string& column) const {
  return std::find(column_names.begin(), column_names.end(), column) !=
         column_names.end();
}

const Eigen::VectorXd& Dataset::column(const std::string& column) const {
  const auto it = std::find(column_names.begin(), column_names.end(), column);
  if (it == column_names.end())
    throw std::invalid_argument("dataset " + name + " has no column " + column);
  return columns[static_cast<std::size_t>(it - column_names.begin())];
}

nlohmann::json dataset_to_json(const Dataset& data) {
  nlohmann::json doc;
  doc["name"] = data.name;
  doc["provenance"] = data.provenance;
  doc["n_rows"] = data.n_rows;
  doc["dropped_rows"] = data.dropped_rows;
  nlohmann::json cols = nlohmann::json::object();
  for (std::size_t i = 0; i < data.column_names.size(); ++i) {
    std::vector<double> values(data.columns[i].data(),
                               data.columns[i].data() + data.columns[i].size());
    cols[data.column_names[i]] = values;
  }
  doc["columns"] = cols;
  doc["column_order"] = data.column_names;
  return doc;
}

Dataset dataset_from_json(const nlohmann::json& doc) {
  Dataset data;
  data.name = doc.at("name").get<std::string>();
  data.provenance = doc.at("provenance").get<std::string>();
  data.n_rows = doc.at("n_rows").get<long>();
  data.dropped_rows = doc.at("dropped_rows").get<long>();
  for (const auto& name : doc.at("column_order")) {
    const auto values =
        doc.at("columns").at(name.get<std::string>()).get<std::vector<double>>();
    data.column_names.push_back(name.get<std::string>());
    data.columns.push_back(
        Eigen::Map<const Eigen::VectorXd>(values.data(), values.size()));
  }
  return data;
}

Eigen::VectorXd load_cpi(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() < 2)
    throw std::runtime_error(path + ": need (date, level) columns");

  std::vector<long> months;
  std::vector<double> levels;
  for (const auto& row : table.rows) {
    if (row.size() < 2 || is_missing(row[0]) || is_missing(row[1])) continue;
    months.push_back(parse_month_index(row[0], path));
    levels.push_back(std::stod(row[1]));
  }
  if (months.size() < 6)
    throw std::runtime_error(path + ": too few monthly observations");
  for (std::size_t i = 1; i < months.size(); ++i) {
    if (months[i] <= months[i - 1])
      throw std::runtime_error(path + ": dates are not strictly increasing");
    if (months[i] != months[i - 1] + 1)
      throw std::runtime_error(path + ": gap in the monthly series before index " +
                               std::to_string(i));
  }
  // Whole quarters only: the first month opens a quarter, the last closes one.
  if (months.front() % 3 != 0)
    throw std::runtime_error(path + ": series starts mid-quarter");
  if (months.back() % 3 != 2)
    throw std::runtime_error(path + ": series ends mid-quarter");

  const std::size_t n_quarters = months.size() / 3;
  Eigen::VectorXd quarterly(n_quarters);
  for (std::size_t q = 0; q < n_quarters; ++q)
    quarterly[q] =
        (levels[3 * q] + levels[3 * q + 1] + levels[3 * q + 2]) / 3.0;

  Eigen::VectorXd inflation(n_quarters - 1);
  for (std::size_t q = 1; q < n_quarters; ++q) {
    if (quarterly[q - 1] == 0.0)
      throw std::runtime_error(path + ": zero quarterly level");
    inflation[q - 1] = 400.0 * (quarterly[q] / quarterly[q - 1] - 1.0);
  }
  return inflation;
}

BostonData load_boston(const std::string& path) {
  const CsvTable csv = read_csv(path);
  std::vector<std::string> header;
  header.reserve(csv.header.size());
  for (const auto& h : csv.header) header.push_back(lower(h));

  const auto find_col = [&](std::initializer_list<const char*> names) {
    for (const char* n : names) {
      const auto it = std::find(header.begin(), header.end(), n);
      if (it != header.end()) return static_cast<long>(it - header.begin());
    }
    return -1L;
  };

  struct Col {
    const char* canonical;
    std::initializer_list<const char*> aliases;
  };
  const std::vector<Col> wanted = {
      {"crim", {"crim"}},     {"zn", {"zn"}},
      {"indus", {"indus"}},   {"chas", {"chas"}},
      {"nox", {"nox"}},       {"rm", {"rm"}},
      {"age", {"age"}},       {"dis", {"dis"}},
      {"rad", {"rad"}},       {"tax", {"tax"}},
      {"ptratio", {"ptratio"}}, {"b", {"b"}},
      {"lstat", {"lstat", "stat"}}, {"medv", {"medv", "mv"}}};

  std::vector<long> index;
  for (const auto& col : wanted) {
    const long at = find_col(col.aliases);
    if (at < 0)
      throw std::invalid_argument(path + ": missing column " +
                                  std::string(col.canonical));
    index.push_back(at);
  }

  std::vector<std::vector<double>> values(wanted.size());
  long dropped = 0;
  for (const auto& row : csv.rows) {
    bool ok = true;
    for (long at : index)
      if (at >= static_cast<long>(row.size()) || is_missing(row[at])) ok = false;
    if (!ok) {
      ++dropped;
      continue;
    }
    for (std::size_t c = 0; c < wanted.size(); ++c)
      values[c].push_back(std::stod(row[index[c]]));
  }
  const long n = static_cast<long>(values[0].size());
  if (n == 0) throw std::runtime_error(path + ": no complete rows");

  BostonData data;
  data.table.name = "boston";
  data.table.provenance = "loaded from " + path + ", dropped " +
                          std::to_string(dropped) + " incomplete rows";
  data.table.n_rows = n;
  data.table.dropped_rows = dropped;
  for (std::size_t c = 0; c < wanted.size(); ++c) {
    data.table.column_names.push_back(wanted[c].canonical);
    data.table.columns.push_back(
        Eigen::Map<const Eigen::VectorXd>(values[c].data(), n));
  }
  data.expected_row_count = (n == 506);

  data.response = data.table.column("medv").array().log();

  data.flexible_names = {"nox", "rm", "dis", "tax", "lstat", "crim"};
  for (const auto& name : data.flexible_names)
    data.flexible.push_back(data.table.column(name));

  data.linear_names = {"zn", "indus", "chas", "age", "rad", "ptratio", "b"};
  data.linear_covariates.resize(n, static_cast<long>(data.linear_names.size()));
  for (std::size_t c = 0; c < data.linear_names.size(); ++c)
    data.linear_covariates.col(static_cast<long>(c)) =
        data.table.column(data.linear_names[c]);
  return data;
}

std::vector<Eigen::VectorXd> synth_mixture_draws(const MixtureOfNormals& mix,
                                                 int n, double duplicate_rate,
                                                 std::uint64_t seed) {
  if (duplicate_rate < 0.0 || duplicate_rate >= 1.0)
    throw std::invalid_argument("duplicate_rate must lie in [0, 1)");
  if (n < 1) throw std::invalid_argument("synth_mixture_draws needs n >= 1");
  Rng rng(seed);
  std::vector<Eigen::VectorXd> draws;
  draws.reserve(n);
  draws.push_back(mix.sample(rng));
  for (int i = 1; i < n; ++i) {
    if (rng.uniform() < duplicate_rate)
      draws.push_back(draws.back());
    else
      draws.push_back(mix.sample(rng));
  }
  return draws;
}

}  // namespace aimh
