#include "ipc/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ipc {
namespace {

using ordered_json = nlohmann::ordered_json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Splits CSV text into records. Handles double-quoted fields and CRLF.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t k = 0; k < text.size(); ++k) {
    const char c = text[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < text.size() && text[k + 1] == '"') {
          field += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && k + 1 < text.size() && text[k + 1] == '\n') ++k;
      if (any || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
      } else {
        rows.emplace_back();  // blank line keeps numbering
      }
      row.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_double(const std::string& raw) {
  const std::string s = trim(raw);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return value;
}

// Orders labels numerically when all of them are numbers.
std::vector<std::string> order_labels(const std::set<std::string>& labels) {
  std::vector<std::string> out(labels.begin(), labels.end());
  const bool numeric = std::all_of(out.begin(), out.end(), [](const std::string& s) {
    const auto v = parse_double(s);
    return v.has_value() && std::isfinite(*v);
  });
  if (numeric) {
    std::stable_sort(out.begin(), out.end(), [](const std::string& a, const std::string& b) {
      return *parse_double(a) < *parse_double(b);
    });
  }
  return out;
}

std::size_t find_column(const std::vector<std::string>& header, const std::string& name) {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(ErrorCode::MissingColumn, "column '" + name + "' not found");
  return static_cast<std::size_t>(it - header.begin());
}

ordered_json real_array(const Eigen::VectorXd& v) {
  ordered_json arr = ordered_json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) arr.push_back(format_real(v(k)));
  return arr;
}

ordered_json real_array(const std::vector<double>& v) {
  ordered_json arr = ordered_json::array();
  for (double x : v) arr.push_back(format_real(x));
  return arr;
}

ordered_json real_matrix(const Eigen::MatrixXd& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(real_array(Eigen::VectorXd(m.row(r).transpose())));
  return rows;
}

ordered_json config_json(const IpcConfig& config) {
  ordered_json c;
  c["delta"] = format_real(config.delta);
  c["d_max"] = config.d_max;
  c["als_tol"] = format_real(config.als_tol);
  c["als_max_iter"] = config.als_max_iter;
  c["threshold_rule"] = to_string(config.threshold_rule);
  c["init_rule"] = to_string(config.init_rule);
  c["n_starts"] = config.n_starts;
  c["seed"] = config.seed;
  return c;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string matrix_csv(const Eigen::MatrixXd& m, const std::vector<std::string>& header,
                       const std::string& label_column, const std::vector<std::string>& labels) {
  std::ostringstream out;
  out << csv_field(label_column);
  for (const auto& h : header) out << ',' << csv_field(h);
  out << '\n';
  if (m.cols() == 0) return out.str();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    out << csv_field(labels[r]);
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << ',' << format_real(m(r, c));
    out << '\n';
  }
  return out.str();
}

std::vector<std::string> factor_names(const IpcFit& fit) {
  std::vector<std::string> names;
  for (const auto& g : fit.groups)
    for (int k = 1; k <= g.dim; ++k)
      names.push_back("f" + std::to_string(g.group_index) + "_" + std::to_string(k));
  return names;
}

}  // namespace

std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

PanelDataset load_long_csv(const std::filesystem::path& path, const LongCsvSchema& schema) {
  if (schema.x_columns.empty()) {
    throw Error(ErrorCode::MissingColumn, "at least one regressor column is required");
  }
  const auto rows = parse_csv(read_file(path));
  if (rows.empty() || rows.front().empty()) {
    throw Error(ErrorCode::ParseError, "line 1: missing header");
  }
  std::vector<std::string> header;
  for (const auto& h : rows.front()) header.push_back(trim(h));
  const std::size_t unit_col = find_column(header, schema.unit_column);
  const std::size_t time_col = find_column(header, schema.time_column);
  const std::size_t y_col = find_column(header, schema.y_column);
  std::vector<std::size_t> x_cols;
  for (const auto& name : schema.x_columns) x_cols.push_back(find_column(header, name));

  struct Cell {
    double y;
    std::vector<double> x;
  };
  std::map<std::pair<std::string, std::string>, Cell> cells;
  std::set<std::string> units;
  std::set<std::string> times;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.empty()) continue;
    const std::string line = "line " + std::to_string(r + 1);
    if (row.size() != header.size()) {
      throw Error(ErrorCode::ParseError, line + ": expected " + std::to_string(header.size()) +
                                             " fields, found " + std::to_string(row.size()));
    }
    auto number = [&](std::size_t col) {
      const auto v = parse_double(row[col]);
      if (!v) {
        throw Error(ErrorCode::ParseError,
                    line + ": column '" + header[col] + "' is not a number: '" + row[col] + "'");
      }
      return *v;
    };
    Cell cell{number(y_col), {}};
    for (std::size_t c : x_cols) cell.x.push_back(number(c));
    const std::string unit = trim(row[unit_col]);
    const std::string time = trim(row[time_col]);
    if (!cells.emplace(std::make_pair(unit, time), std::move(cell)).second) {
      throw Error(ErrorCode::DuplicateCell,
                  line + ": duplicate observation for unit '" + unit + "', time '" + time + "'");
    }
    units.insert(unit);
    times.insert(time);
  }
  const auto unit_order = order_labels(units);
  const auto time_order = order_labels(times);
  const auto n = static_cast<Eigen::Index>(unit_order.size());
  const auto t = static_cast<Eigen::Index>(time_order.size());
  const auto dx = static_cast<Eigen::Index>(x_cols.size());

  if (static_cast<std::size_t>(n * t) != cells.size()) {
    std::string missing;
    int shown = 0;
    for (const auto& u : unit_order) {
      for (const auto& s : time_order) {
        if (!cells.count({u, s}) && shown < 10) {
          missing += (shown ? ", " : "") + std::string("(") + u + ", " + s + ")";
          ++shown;
        }
      }
    }
    throw Error(ErrorCode::UnbalancedPanel,
                std::to_string(n * t - static_cast<Eigen::Index>(cells.size())) +
                    " missing unit-period pairs: " + missing);
  }

  Eigen::MatrixXd y(t, n);
  Eigen::MatrixXd x(t, n * dx);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index s = 0; s < t; ++s) {
      const Cell& cell = cells.at({unit_order[i], time_order[s]});
      y(s, i) = cell.y;
      for (Eigen::Index j = 0; j < dx; ++j) x(s, i * dx + j) = cell.x[j];
    }
  }
  PanelDataset data(std::move(y), std::move(x), dx, unit_order, time_order);
  validate_dataset(data);
  return data;
}

void write_long_csv(const PanelDataset& data, const std::filesystem::path& path,
                    const LongCsvSchema& schema) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << csv_field(schema.unit_column) << ',' << csv_field(schema.time_column) << ','
      << csv_field(schema.y_column);
  for (const auto& name : schema.x_columns) out << ',' << csv_field(name);
  out << '\n';
  for (Eigen::Index i = 0; i < data.n_units(); ++i) {
    for (Eigen::Index s = 0; s < data.n_periods(); ++s) {
      out << csv_field(data.unit_labels()[i]) << ',' << csv_field(data.time_labels()[s]) << ','
          << format_real(data.y()(s, i));
      for (Eigen::Index j = 0; j < data.n_regressors(); ++j) out << ',' << format_real(data.x_at(j, i, s));
      out << '\n';
    }
  }
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

Eigen::MatrixXd read_numeric_csv(const std::filesystem::path& path) {
  const auto rows = parse_csv(read_file(path));
  std::vector<std::vector<double>> values;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].empty()) continue;
    std::vector<double> line;
    for (const auto& f : rows[r]) {
      const auto v = parse_double(f);
      if (!v) {
        throw Error(ErrorCode::ParseError,
                    path.filename().string() + " line " + std::to_string(r + 1) + ": '" + f +
                        "' is not a number");
      }
      line.push_back(*v);
    }
    if (!values.empty() && line.size() != values.front().size()) {
      throw Error(ErrorCode::ParseError, path.filename().string() + " line " +
                                             std::to_string(r + 1) + ": ragged row");
    }
    values.push_back(std::move(line));
  }
  if (values.empty()) throw Error(ErrorCode::ParseError, path.filename().string() + ": empty");
  Eigen::MatrixXd m(values.size(), values.front().size());
  for (std::size_t r = 0; r < values.size(); ++r)
    for (std::size_t c = 0; c < values[r].size(); ++c) m(r, c) = values[r][c];
  return m;
}

std::pair<std::vector<std::string>, Eigen::MatrixXd> read_table_csv(
    const std::filesystem::path& path) {
  const auto rows = parse_csv(read_file(path));
  if (rows.empty()) throw Error(ErrorCode::ParseError, path.filename().string() + ": empty");
  std::vector<std::string> header = rows.front();
  std::vector<std::vector<double>> values;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    if (rows[r].empty()) continue;
    if (rows[r].size() != header.size()) {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(r + 1) + ": ragged row");
    }
    std::vector<double> line;
    // First column is the row label.
    for (std::size_t c = 1; c < rows[r].size(); ++c) {
      const auto v = parse_double(rows[r][c]);
      if (!v) throw Error(ErrorCode::ParseError, "line " + std::to_string(r + 1) + ": not a number");
      line.push_back(*v);
    }
    values.push_back(std::move(line));
  }
  Eigen::MatrixXd m(values.size(), header.size() - 1);
  for (std::size_t r = 0; r < values.size(); ++r)
    for (std::size_t c = 0; c < values[r].size(); ++c) m(r, c) = values[r][c];
  header.erase(header.begin());
  return {header, m};
}

std::string fit_json(const FitReport& report) {
  const IpcFit& fit = *report.fit;
  ordered_json j;
  j["format"] = "ipc-fit/1";
  j["n_units"] = fit.loadings_combined.rows();
  j["n_periods"] = fit.f0.rows();
  j["n_regressors"] = fit.beta.size();
  j["regressors"] = report.regressor_names;
  j["config"] = config_json(report.config);
  ordered_json conv;
  conv["converged"] = fit.converged;
  conv["als_iterations"] = fit.als_iterations;
  conv["ssr_path"] = real_array(fit.ssr_path);
  j["convergence"] = conv;
  j["beta0"] = real_array(fit.beta0);
  j["beta1"] = real_array(fit.beta1);
  j["beta"] = real_array(fit.beta);
  if (!report.tests.empty()) {
    j["std_errors"] = real_array(report.tests.front().result.std_errors);
    j["covariance"] = real_matrix(report.tests.front().result.covariance);
  } else {
    j["std_errors"] = nullptr;
    j["covariance"] = nullptr;
  }
  j["n_groups"] = fit.n_groups;
  j["total_factors"] = fit.total_factors;
  j["group_dims"] = ordered_json::array();
  j["groups"] = ordered_json::array();
  for (const auto& g : fit.groups) {
    j["group_dims"].push_back(g.dim);
    ordered_json gj;
    gj["index"] = g.group_index;
    gj["dim"] = g.dim;
    gj["eigenvalues"] = real_array(g.eigenvalues);
    gj["mock_eigenvalue"] = format_real(g.mock_eigenvalue);
    gj["threshold"] = format_real(g.threshold);
    gj["criterion"] = real_array(g.criterion);
    j["groups"].push_back(gj);
  }
  j["wald_tests"] = ordered_json::array();
  for (const auto& t : report.tests) {
    ordered_json tj;
    tj["name"] = t.name;
    tj["r_matrix"] = real_matrix(t.spec.r_matrix);
    tj["r_vector"] = real_array(t.spec.r_vector);
    tj["statistic"] = format_real(t.result.wald_stat);
    tj["dof"] = t.result.dof;
    tj["p_value"] = format_real(t.result.p_value);
    j["wald_tests"].push_back(tj);
  }
  if (report.jackknife) {
    const auto& jk = *report.jackknife;
    ordered_json jj;
    jj["beta_bc"] = real_array(jk.beta_bc);
    ordered_json subs;
    ordered_json dims;
    for (std::size_t k = 0; k < 4; ++k) {
      subs[kJackknifeSubPanels[k]] = real_array(jk.sub_estimates[k]);
      dims[kJackknifeSubPanels[k]] = jk.sub_group_dims[k];
    }
    jj["sub_estimates"] = subs;
    jj["sub_group_dims"] = dims;
    j["jackknife"] = jj;
  } else {
    j["jackknife"] = nullptr;
  }
  return j.dump(2) + "\n";
}

std::string factors_csv(const IpcFit& fit, const std::vector<std::string>& time_labels) {
  return matrix_csv(fit.factors_combined, factor_names(fit), "time", time_labels);
}

std::string loadings_csv(const IpcFit& fit, const std::vector<std::string>& unit_labels) {
  return matrix_csv(fit.loadings_combined, factor_names(fit), "id", unit_labels);
}

void write_files_atomically(const std::filesystem::path& out_dir,
                            const std::vector<std::pair<std::string, std::string>>& files) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw Error(ErrorCode::IoError, "cannot create output directory " + out_dir.string());
  }
  std::vector<fs::path> staged;
  auto cleanup = [&] {
    for (const auto& p : staged) fs::remove(p, ec);
  };
  for (const auto& [name, content] : files) {
    const fs::path tmp = out_dir / ("." + name + ".tmp");
    std::ofstream out(tmp, std::ios::binary);
    staged.push_back(tmp);
    out << content;
    out.close();
    if (!out) {
      cleanup();
      throw Error(ErrorCode::IoError, "failed writing " + tmp.string());
    }
  }
  for (const auto& [name, content] : files) {
    if (fs::is_directory(out_dir / name)) {
      cleanup();
      throw Error(ErrorCode::IoError, (out_dir / name).string() + " is a directory");
    }
  }
  for (std::size_t k = 0; k < files.size(); ++k) {
    fs::rename(staged[k], out_dir / files[k].first, ec);
    if (ec) {
      // Undo the files already moved so the directory never holds a partial set.
      for (std::size_t m = 0; m < k; ++m) fs::remove(out_dir / files[m].first, ec);
      cleanup();
      throw Error(ErrorCode::IoError, "failed to move " + files[k].first + " into place");
    }
  }
}

void write_fit(const FitReport& report, const std::filesystem::path& out_dir) {
  write_files_atomically(out_dir, {{"fit.json", fit_json(report)},
                                   {"factors.csv", factors_csv(*report.fit, report.time_labels)},
                                   {"loadings.csv", loadings_csv(*report.fit, report.unit_labels)}});
}

std::string mc_result_json(const McResult& result, const IpcConfig& config) {
  ordered_json j;
  j["format"] = "ipc-mc/1";
  j["dgp"] = "dgp1";
  j["n_units"] = result.n_units;
  j["n_periods"] = result.n_periods;
  j["seed"] = result.seed;
  j["reps"] = result.reps;
  j["failures"] = result.failures;
  j["config"] = config_json(config);
  j["joint_selection_freq"] = format_real(result.joint_selection_freq);
  j["per_group_freq"] = real_array(std::vector<double>(result.per_group_freq.begin(),
                                                       result.per_group_freq.end()));
  ordered_json rmse;
  ordered_json size;
  for (std::size_t k = 0; k < 4; ++k) {
    rmse[kMcEstimatorNames[k]] = format_real(result.rmse_beta[k]);
    size[kMcEstimatorNames[k]] = format_real(result.wald_size[k]);
  }
  j["rmse_beta"] = rmse;
  j["rmse_projector"] = format_real(result.rmse_projector);
  j["wald_size"] = size;
  return j.dump(2) + "\n";
}

std::string mc_table_csv(const McResult& r) {
  std::ostringstream out;
  out << "N,T,joint_freq,d1_freq,d2_freq,d3_freq,rmse_P,"
         "rmse_beta0,rmse_beta1,rmse_beta,rmse_beta_oracle,"
         "size_beta0,size_beta1,size_beta,size_beta_oracle\n";
  out << r.n_units << ',' << r.n_periods << ',' << format_real(r.joint_selection_freq);
  for (double f : r.per_group_freq) out << ',' << format_real(f);
  out << ',' << format_real(r.rmse_projector);
  for (double v : r.rmse_beta) out << ',' << format_real(v);
  for (double v : r.wald_size) out << ',' << format_real(v);
  out << '\n';
  return out.str();
}

void write_mc_result(const McResult& result, const IpcConfig& config,
                     const std::filesystem::path& out_dir) {
  write_files_atomically(out_dir, {{"mc_result.json", mc_result_json(result, config)},
                                   {"table.csv", mc_table_csv(result)}});
}

}  // namespace ipc
