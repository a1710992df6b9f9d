#include "isocal/io.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace isocal {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("cannot move '" + tmp + "' to '" + path + "'");
  }
}

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  double v;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument(where + ": cannot parse number '" + s + "'");
  }
  return v;
}

struct CsvReader {
  explicit CsvReader(const std::string& path) : path_(path), in_(path) {
    if (!in_) throw std::invalid_argument("cannot open '" + path + "'");
  }
  bool next(std::vector<std::string>& fields) {
    std::string line;
    while (std::getline(in_, line)) {
      ++lineno_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      fields = split_csv_line(line);
      return true;
    }
    return false;
  }
  std::string where() const {
    return path_ + ":" + std::to_string(lineno_);
  }
  std::string path_;
  std::ifstream in_;
  int lineno_ = 0;
};

void expect_header(CsvReader& r, const std::vector<std::string>& want,
                   std::vector<std::string>& got) {
  if (!r.next(got)) throw std::invalid_argument(r.path_ + ": empty file");
  for (size_t i = 0; i < want.size(); ++i) {
    if (i >= got.size() || got[i] != want[i]) {
      throw std::invalid_argument(r.where() + ": expected header starting '" +
                                  want[i] + "'");
    }
  }
}

}  // namespace

SurvivalDataset load_dataset(const std::string& path) {
  CsvReader r(path);
  std::vector<std::string> fields;
  expect_header(r, {"id", "time", "event"}, fields);
  const int p = static_cast<int>(fields.size()) - 3;
  for (int j = 0; j < p; ++j) {
    if (fields[3 + j] != "x" + std::to_string(j + 1)) {
      throw std::invalid_argument(r.where() + ": covariate columns must be x1..xp");
    }
  }
  SurvivalDataset ds;
  ds.p = p;
  while (r.next(fields)) {
    if (static_cast<int>(fields.size()) != 3 + p) {
      throw std::invalid_argument(r.where() + ": expected " +
                                  std::to_string(3 + p) + " fields");
    }
    ds.id.push_back(fields[0]);
    ds.time.push_back(parse_double(fields[1], r.where()));
    if (fields[2] == "0") {
      ds.event.push_back(0);
    } else if (fields[2] == "1") {
      ds.event.push_back(1);
    } else {
      throw std::invalid_argument(r.where() + ": event must be 0 or 1, got '" +
                                  fields[2] + "'");
    }
    for (int j = 0; j < p; ++j) {
      ds.x.push_back(parse_double(fields[3 + j], r.where()));
    }
  }
  ds.validate();
  return ds;
}

void save_dataset(const std::string& path, const SurvivalDataset& ds) {
  ds.validate();
  std::string out = "id,time,event";
  for (int j = 0; j < ds.p; ++j) out += ",x" + std::to_string(j + 1);
  out += "\n";
  for (int i = 0; i < ds.n(); ++i) {
    out += ds.id[i];
    out += ',';
    out += format_double(ds.time[i]);
    out += ',';
    out += ds.event[i] ? '1' : '0';
    for (int j = 0; j < ds.p; ++j) {
      out += ',';
      out += format_double(ds.row(i)[j]);
    }
    out += '\n';
  }
  write_text_atomic(path, out);
}

RiskScores load_risks(const std::string& path) {
  CsvReader r(path);
  std::vector<std::string> fields;
  expect_header(r, {"id", "risk"}, fields);
  RiskScores rs;
  while (r.next(fields)) {
    if (fields.size() != 2) {
      throw std::invalid_argument(r.where() + ": expected 2 fields");
    }
    rs.id.push_back(fields[0]);
    rs.value.push_back(parse_double(fields[1], r.where()));
  }
  rs.validate();
  return rs;
}

void save_risks(const std::string& path, const RiskScores& rs) {
  rs.validate();
  std::string out = "id,risk\n";
  for (int i = 0; i < rs.n(); ++i) {
    out += rs.id[i];
    out += ',';
    out += format_double(rs.value[i]);
    out += '\n';
  }
  write_text_atomic(path, out);
}

SimulationTruths load_truths(const std::string& path) {
  CsvReader r(path);
  std::vector<std::string> fields;
  expect_header(r, {"id", "true_time", "censor_time", "mu", "sigma"}, fields);
  SimulationTruths t;
  while (r.next(fields)) {
    if (fields.size() != 5) {
      throw std::invalid_argument(r.where() + ": expected 5 fields");
    }
    t.id.push_back(fields[0]);
    t.true_time.push_back(parse_double(fields[1], r.where()));
    t.censor_time.push_back(parse_double(fields[2], r.where()));
    t.mu.push_back(parse_double(fields[3], r.where()));
    t.sigma.push_back(parse_double(fields[4], r.where()));
  }
  if (t.n() == 0) throw std::invalid_argument(path + ": no rows");
  return t;
}

void save_truths(const std::string& path, const SimulationTruths& t) {
  std::string out = "id,true_time,censor_time,mu,sigma\n";
  for (int i = 0; i < t.n(); ++i) {
    out += t.id[i];
    out += ',';
    out += format_double(t.true_time[i]);
    out += ',';
    out += format_double(t.censor_time[i]);
    out += ',';
    out += format_double(t.mu[i]);
    out += ',';
    out += format_double(t.sigma[i]);
    out += '\n';
  }
  write_text_atomic(path, out);
}

namespace {

json parse_json(const std::string& path) {
  json j = json::parse(read_text(path), nullptr, false);
  if (j.is_discarded()) {
    throw std::invalid_argument(path + ": invalid JSON");
  }
  return j;
}

std::vector<double> number_array(const json& j, const std::string& key,
                                 const std::string& path) {
  if (!j.contains(key) || !j[key].is_array()) {
    throw std::invalid_argument(path + ": missing array '" + key + "'");
  }
  std::vector<double> out;
  out.reserve(j[key].size());
  for (const auto& v : j[key]) {
    if (!v.is_number()) {
      throw std::invalid_argument(path + ": '" + key + "' has a non-number");
    }
    out.push_back(v.get<double>());
  }
  return out;
}

std::vector<double> matrix_rows(const json& j, const std::string& key,
                                size_t n_rows, size_t n_cols,
                                const std::string& path) {
  if (!j.contains(key) || !j[key].is_array() || j[key].size() != n_rows) {
    throw std::invalid_argument(path + ": '" + key + "' must have " +
                                std::to_string(n_rows) + " rows");
  }
  std::vector<double> out;
  out.reserve(n_rows * n_cols);
  for (const auto& row : j[key]) {
    if (!row.is_array() || row.size() != n_cols) {
      throw std::invalid_argument(path + ": '" + key + "' row length mismatch");
    }
    for (const auto& v : row) {
      if (!v.is_number()) {
        throw std::invalid_argument(path + ": '" + key + "' has a non-number");
      }
      out.push_back(v.get<double>());
    }
  }
  return out;
}

json matrix_to_json(const std::vector<double>& m, size_t n_rows,
                    size_t n_cols) {
  json rows = json::array();
  for (size_t i = 0; i < n_rows; ++i) {
    json row = json::array();
    for (size_t k = 0; k < n_cols; ++k) row.push_back(m[i * n_cols + k]);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

SurvivalProbabilityGrid load_grid(const std::string& path) {
  json j = parse_json(path);
  SurvivalProbabilityGrid g;
  if (!j.contains("role") || !j["role"].is_string()) {
    throw std::invalid_argument(path + ": missing string 'role'");
  }
  const std::string role = j["role"].get<std::string>();
  if (role == "survival") {
    g.role = GridRole::survival;
  } else if (role == "censoring") {
    g.role = GridRole::censoring;
  } else {
    throw std::invalid_argument(path + ": role must be 'survival' or 'censoring'");
  }
  g.grid.times = number_array(j, "times", path);
  if (!j.contains("subjects") || !j["subjects"].is_array()) {
    throw std::invalid_argument(path + ": missing array 'subjects'");
  }
  for (const auto& s : j["subjects"]) {
    if (!s.is_string()) throw std::invalid_argument(path + ": subject ids must be strings");
    g.subjects.push_back(s.get<std::string>());
  }
  g.probs = matrix_rows(j, "probs", g.subjects.size(), g.grid.times.size(), path);
  g.validate();
  return g;
}

void save_grid(const std::string& path, const SurvivalProbabilityGrid& g) {
  g.validate();
  json j;
  j["role"] = g.role == GridRole::survival ? "survival" : "censoring";
  j["times"] = g.grid.times;
  j["subjects"] = g.subjects;
  j["probs"] = matrix_to_json(g.probs, g.subjects.size(), g.grid.times.size());
  write_text_atomic(path, j.dump());
}

CalibratedSurface load_surface(const std::string& path) {
  json j = parse_json(path);
  CalibratedSurface s;
  if (!j.contains("method") || !j["method"].is_string()) {
    throw std::invalid_argument(path + ": missing string 'method'");
  }
  s.method = j["method"].get<std::string>();
  s.risks = number_array(j, "risks", path);
  s.grid.times = number_array(j, "times", path);
  s.surface = matrix_rows(j, "surface", s.risks.size(), s.grid.times.size(), path);
  if (!j.contains("interpolation") || !j["interpolation"].is_string()) {
    throw std::invalid_argument(path + ": missing string 'interpolation'");
  }
  const std::string interp = j["interpolation"].get<std::string>();
  if (interp == "step") {
    s.interpolation = Interpolation::step;
  } else if (interp == "bilinear") {
    s.interpolation = Interpolation::bilinear;
  } else {
    throw std::invalid_argument(path + ": interpolation must be 'step' or 'bilinear'");
  }
  s.validate();
  return s;
}

void save_surface(const std::string& path, const CalibratedSurface& s) {
  s.validate();
  json j;
  j["method"] = s.method;
  j["risks"] = s.risks;
  j["times"] = s.grid.times;
  j["surface"] = matrix_to_json(s.surface, s.risks.size(), s.grid.times.size());
  j["interpolation"] =
      s.interpolation == Interpolation::step ? "step" : "bilinear";
  write_text_atomic(path, j.dump());
}

CoxModel load_cox_model(const std::string& path) {
  json j = parse_json(path);
  CoxModel m;
  m.coef = number_array(j, "coef", path);
  m.baseline.times = number_array(j, "baseline_times", path);
  m.baseline.increments = number_array(j, "baseline_increments", path);
  m.baseline.validate();
  if (j.contains("ridge")) m.ridge = j["ridge"].get<double>();
  for (double c : m.coef) {
    if (!std::isfinite(c)) throw std::invalid_argument(path + ": non-finite coefficient");
  }
  return m;
}

void save_cox_model(const std::string& path, const CoxModel& m) {
  json j;
  j["coef"] = m.coef;
  j["baseline_times"] = m.baseline.times;
  j["baseline_increments"] = m.baseline.increments;
  j["ridge"] = m.ridge;
  j["diagnostics"] = {{"loglik", m.loglik},
                      {"grad_norm", m.grad_norm},
                      {"iterations", m.iterations},
                      {"stderr", m.stderrs}};
  write_text_atomic(path, j.dump());
}

}  // namespace isocal
