#include "logic_cells/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "logic_cells/error.hpp"

namespace logic_cells::report {

std::string format_double(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) text_ += ",";
    text_ += header[i];
  }
  text_ += "\n";
}

CsvWriter& CsvWriter::cell(const std::string& v) {
  if (pending_ == columns_) throw ShapeError("CSV row has too many cells");
  if (v.find_first_of(",\n") != std::string::npos) throw DomainError("CSV field contains a separator");
  if (pending_) text_ += ",";
  text_ += v;
  ++pending_;
  return *this;
}

CsvWriter& CsvWriter::cell(double v) { return cell(format_double(v)); }
CsvWriter& CsvWriter::cell(int v) { return cell(std::to_string(v)); }
CsvWriter& CsvWriter::cell(long long v) { return cell(std::to_string(v)); }

void CsvWriter::end_row() {
  if (pending_ != columns_) throw ShapeError("CSV row has too few cells");
  text_ += "\n";
  pending_ = 0;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  throw DomainError("CSV has no column '" + name + "'");
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw DomainError("not a number: '" + s + "'");
  return v;
}

std::string bucket_text(const logic::Verdict& v) { return v ? std::to_string(*v) : "none"; }

}  // namespace

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::stringstream ss(text);
  std::string line;
  bool first = true;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (first) {
      t.header = std::move(fields);
      first = false;
      continue;
    }
    if (fields.size() != t.header.size()) throw ShapeError("CSV row width differs from header");
    t.rows.push_back(std::move(fields));
  }
  if (first) throw DomainError("CSV has no header");
  return t;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out << contents;
  if (!out) throw Error("write failed for '" + path + "'");
}

std::string verdicts_csv(const logic::LogicMatrix& matrix, const logic::Census& census) {
  std::vector<std::string> header{"cell"};
  for (const auto& n : matrix.conditions().names) {
    header.push_back(n);
    header.push_back(n + "_concentration");
  }
  header.push_back("kind");
  header.push_back("logical_value");
  CsvWriter w(header);
  for (int k = 0; k < matrix.num_cells(); ++k) {
    const auto& v = matrix.cells()[k];
    w.cell(v.cell);
    for (int s = 0; s < matrix.num_conditions(); ++s) w.cell(bucket_text(v.bucket[s])).cell(v.concentration[s]);
    w.cell(census.cells[k].kind).cell(logic::individual_logical_value(matrix, k).value);
    w.end_row();
  }
  return w.text();
}

std::vector<logic::CellVerdict> read_verdicts_csv(const std::string& text, const logic::ConditionSet& conditions) {
  const CsvTable t = parse_csv(text);
  const int cell_col = t.column("cell");
  std::vector<logic::CellVerdict> out;
  for (const auto& row : t.rows) {
    logic::CellVerdict v;
    v.cell = std::stoi(row[cell_col]);
    for (const auto& n : conditions.names) {
      const std::string& b = row[t.column(n)];
      v.bucket.push_back(b == "none" ? logic::Verdict{} : logic::Verdict{std::stoi(b)});
      v.concentration.push_back(parse_double(row[t.column(n + "_concentration")]));
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::string logic_matrix_csv(const logic::LogicMatrix& matrix) {
  std::vector<std::string> header{"cell", "epsilon"};
  for (const auto& n : matrix.conditions().names) header.push_back(n);
  header.push_back("score");
  CsvWriter w(header);
  for (int k = 0; k < matrix.num_cells(); ++k) {
    for (int eps : {1, -1}) {
      w.cell(matrix.cells()[k].cell).cell(eps);
      for (int s = 0; s < matrix.num_conditions(); ++s) w.cell(matrix.entry(k, eps, s));
      w.cell(matrix.score(k, eps));
      w.end_row();
    }
  }
  return w.text();
}

std::string matrix_csv(const Eigen::MatrixXd& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ",";
      out += format_double(m(i, j));
    }
    out += "\n";
  }
  return out;
}

Eigen::MatrixXd read_matrix_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    std::vector<double> r;
    for (const auto& f : split_fields(line)) r.push_back(parse_double(f));
    if (!rows.empty() && r.size() != rows[0].size()) throw ShapeError("ragged matrix CSV");
    rows.push_back(std::move(r));
  }
  Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  }
  return m;
}

std::string scores_csv(const std::vector<weights::ScoreRecord>& records) {
  CsvWriter w({"triple", "N", "logic_angle", "mu_W", "brut"});
  for (const auto& r : records) {
    std::string id;
    for (std::size_t i = 0; i < r.cells.size(); ++i) id += (i ? "-" : "") + std::to_string(r.cells[i]);
    w.cell(id).cell(r.score).cell(r.logic_angle).cell(r.mu_w).cell(r.brut);
    w.end_row();
  }
  return w.text();
}

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string short_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string svg_open(double w, double h) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" viewBox=\"0 0 " + num(w) + " " + num(h) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text_at(double x, double y, const std::string& s, const std::string& anchor = "middle", int size = 12) {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" font-size=\"" +
         std::to_string(size) + "\" text-anchor=\"" + anchor + "\">" + escape(s) + "</text>\n";
}

std::string diverging_color(double t) {
  // t in [0, 1]: blue, white, red.
  t = std::clamp(t, 0.0, 1.0);
  int r, g, b;
  if (t < 0.5) {
    const double u = t / 0.5;
    r = static_cast<int>(std::lround(255 * u));
    g = r;
    b = 255;
  } else {
    const double u = (t - 0.5) / 0.5;
    r = 255;
    g = static_cast<int>(std::lround(255 * (1.0 - u)));
    b = g;
  }
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

struct Frame {
  double left = 60, top = 40, width = 400, height = 300;
};

std::string axes(const Frame& f, double x0, double x1, double y0, double y1, const std::string& x_label,
                 const std::string& y_label) {
  std::string s;
  s += "<line x1=\"" + num(f.left) + "\" y1=\"" + num(f.top + f.height) + "\" x2=\"" + num(f.left + f.width) +
       "\" y2=\"" + num(f.top + f.height) + "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + num(f.left) + "\" y1=\"" + num(f.top) + "\" x2=\"" + num(f.left) + "\" y2=\"" +
       num(f.top + f.height) + "\" stroke=\"black\"/>\n";
  s += text_at(f.left, f.top + f.height + 16, short_num(x0));
  s += text_at(f.left + f.width, f.top + f.height + 16, short_num(x1));
  s += text_at(f.left - 6, f.top + f.height, short_num(y0), "end");
  s += text_at(f.left - 6, f.top + 10, short_num(y1), "end");
  s += text_at(f.left + f.width / 2, f.top + f.height + 34, x_label);
  s += "<text x=\"14\" y=\"" + num(f.top + f.height / 2) + "\" font-family=\"sans-serif\" font-size=\"12\" " +
       "text-anchor=\"middle\" transform=\"rotate(-90 14 " + num(f.top + f.height / 2) + ")\">" + escape(y_label) +
       "</text>\n";
  return s;
}

}  // namespace

std::string heatmap_svg(const Eigen::MatrixXd& values, double lo, double hi, const std::string& title) {
  if (values.size() == 0) throw ShapeError("empty heatmap");
  if (!(hi > lo)) throw DomainError("heatmap range is empty");
  const double cell = std::max(1.0, 400.0 / std::max(values.rows(), values.cols()));
  const double w = cell * values.cols();
  const double h = cell * values.rows();
  const double left = 50, top = 30;
  std::string s = svg_open(left + w + 20, top + h + 40);
  s += text_at(left + w / 2, 18, title);
  // Row 0 (first red center) at the bottom.
  for (Eigen::Index i = 0; i < values.rows(); ++i) {
    for (Eigen::Index j = 0; j < values.cols(); ++j) {
      const double y = top + (values.rows() - 1 - i) * cell;
      s += "<rect x=\"" + num(left + j * cell) + "\" y=\"" + num(y) + "\" width=\"" + num(cell) + "\" height=\"" +
           num(cell) + "\" fill=\"" + diverging_color((values(i, j) - lo) / (hi - lo)) + "\"/>\n";
    }
  }
  s += text_at(left + w / 2, top + h + 28, "green center");
  s += "<text x=\"16\" y=\"" + num(top + h / 2) + "\" font-family=\"sans-serif\" font-size=\"12\" " +
       "text-anchor=\"middle\" transform=\"rotate(-90 16 " + num(top + h / 2) + ")\">red center</text>\n";
  s += "</svg>\n";
  return s;
}

std::string histogram_svg(const weights::Bins& bins, const std::string& title, const std::string& x_label) {
  const Frame f;
  std::string s = svg_open(f.left + f.width + 30, f.top + f.height + 50);
  s += text_at(f.left + f.width / 2, 22, title);
  const int peak = bins.counts.empty() ? 0 : *std::max_element(bins.counts.begin(), bins.counts.end());
  const double bw = bins.counts.empty() ? 0.0 : f.width / bins.counts.size();
  for (std::size_t i = 0; i < bins.counts.size(); ++i) {
    const double h = peak == 0 ? 0.0 : f.height * bins.counts[i] / peak;
    s += "<rect x=\"" + num(f.left + i * bw) + "\" y=\"" + num(f.top + f.height - h) + "\" width=\"" + num(bw) +
         "\" height=\"" + num(h) + "\" fill=\"steelblue\" stroke=\"black\" stroke-width=\"0.5\"/>\n";
  }
  s += axes(f, bins.lo, bins.hi, 0, peak, x_label, "count");
  s += "</svg>\n";
  return s;
}

std::string scatter_svg(const std::vector<double>& x, const std::vector<double>& y,
                        const std::optional<weights::LinearFit>& fit, const std::string& title,
                        const std::string& x_label, const std::string& y_label) {
  if (x.size() != y.size()) throw ShapeError("scatter: length mismatch");
  const Frame f;
  std::string s = svg_open(f.left + f.width + 30, f.top + f.height + 50);
  s += text_at(f.left + f.width / 2, 22, title);
  double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (!x.empty()) {
    const auto [xa, xb] = std::minmax_element(x.begin(), x.end());
    const auto [ya, yb] = std::minmax_element(y.begin(), y.end());
    x0 = *xa;
    x1 = *xb;
    y0 = *ya;
    y1 = *yb;
  }
  if (x1 <= x0) x1 = x0 + 1.0;
  if (y1 <= y0) y1 = y0 + 1.0;
  auto px = [&](double v) { return f.left + (v - x0) / (x1 - x0) * f.width; };
  auto py = [&](double v) { return f.top + f.height - (v - y0) / (y1 - y0) * f.height; };
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += "<circle cx=\"" + num(px(x[i])) + "\" cy=\"" + num(py(y[i])) + "\" r=\"2\" fill=\"black\" " +
         "fill-opacity=\"0.5\"/>\n";
  }
  if (fit) {
    s += "<line x1=\"" + num(px(x0)) + "\" y1=\"" + num(py(fit->slope * x0 + fit->intercept)) + "\" x2=\"" +
         num(px(x1)) + "\" y2=\"" + num(py(fit->slope * x1 + fit->intercept)) +
         "\" stroke=\"red\" stroke-width=\"1.5\"/>\n";
  }
  s += axes(f, x0, x1, y0, y1, x_label, y_label);
  s += "</svg>\n";
  return s;
}

}  // namespace logic_cells::report
