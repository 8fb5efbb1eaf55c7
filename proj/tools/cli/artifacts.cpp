#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <openssl/evp.h>

#include "cli/cli.hpp"

namespace crsobolev::cli {

namespace fs = std::filesystem;

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failed");
  std::ostringstream out;
  for (unsigned int i = 0; i < len; ++i) out << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  return out.str();
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw fs::filesystem_error("cannot open for writing", path, std::make_error_code(std::errc::io_error));
  return f;
}

std::string short_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string safe_name(std::string s) {
  for (char& c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  return s;
}

}  // namespace

void write_csv(const Table& table, const fs::path& path) {
  auto f = open_out(path);
  for (std::size_t i = 0; i < table.columns.size(); ++i) f << (i ? "," : "") << table.columns[i];
  f << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) f << (i ? "," : "") << format_number(row[i]);
    f << '\n';
  }
}

void write_svg(const Table& table, const std::string& x, const std::vector<std::string>& ys, const std::string& title,
               const fs::path& path) {
  auto col = [&](const std::string& name) {
    const auto it = std::find(table.columns.begin(), table.columns.end(), name);
    if (it == table.columns.end()) throw std::out_of_range("write_svg: no column " + name);
    return static_cast<std::size_t>(it - table.columns.begin());
  };
  const std::size_t xi = col(x);
  std::vector<std::size_t> yi;
  for (const auto& y : ys) yi.push_back(col(y));

  bool logx = true, logy = true;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& r : table.rows) {
    if (!std::isfinite(r[xi])) continue;
    logx = logx && r[xi] > 0;
    x0 = std::min(x0, r[xi]);
    x1 = std::max(x1, r[xi]);
    for (auto k : yi) {
      if (!std::isfinite(r[k])) continue;
      logy = logy && r[k] > 0;
      y0 = std::min(y0, r[k]);
      y1 = std::max(y1, r[k]);
    }
  }
  auto tx = [&](double v) { return logx ? std::log10(v) : v; };
  auto ty = [&](double v) { return logy ? std::log10(v) : v; };
  double ax0 = tx(x0), ax1 = tx(x1), ay0 = ty(y0), ay1 = ty(y1);
  if (!(ax1 > ax0)) ax0 -= 0.5, ax1 += 0.5;
  if (!(ay1 > ay0)) ay0 -= 0.5, ay1 += 0.5;
  constexpr double w = 640, h = 420, ml = 70, mr = 150, mt = 40, mb = 50;
  auto px = [&](double v) { return ml + (tx(v) - ax0) / (ax1 - ax0) * (w - ml - mr); };
  auto py = [&](double v) { return h - mb - (ty(v) - ay0) / (ay1 - ay0) * (h - mt - mb); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

  auto f = open_out(path);
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  f << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  f << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << w - ml - mr << "\" height=\"" << h - mt - mb
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  f << "<text x=\"" << (ml + w - mr) / 2 << "\" y=\"" << h - 12 << "\" text-anchor=\"middle\">" << x
    << (logx ? " (log)" : "") << "</text>\n";
  f << "<text x=\"" << ml << "\" y=\"" << h - mb + 16 << "\" text-anchor=\"middle\">" << short_number(x0) << "</text>\n";
  f << "<text x=\"" << w - mr << "\" y=\"" << h - mb + 16 << "\" text-anchor=\"middle\">" << short_number(x1) << "</text>\n";
  f << "<text x=\"" << ml - 6 << "\" y=\"" << h - mb << "\" text-anchor=\"end\">" << short_number(y0) << "</text>\n";
  f << "<text x=\"" << ml - 6 << "\" y=\"" << mt + 10 << "\" text-anchor=\"end\">" << short_number(y1) << "</text>\n";
  for (std::size_t c = 0; c < yi.size(); ++c) {
    const char* color = colors[c % 5];
    f << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& r : table.rows)
      if (std::isfinite(r[xi]) && std::isfinite(r[yi[c]])) f << short_number(px(r[xi])) << "," << short_number(py(r[yi[c]])) << " ";
    f << "\"/>\n";
    for (const auto& r : table.rows)
      if (std::isfinite(r[xi]) && std::isfinite(r[yi[c]]))
        f << "<circle cx=\"" << short_number(px(r[xi])) << "\" cy=\"" << short_number(py(r[yi[c]])) << "\" r=\"3\" fill=\""
          << color << "\"/>\n";
    f << "<text x=\"" << w - mr + 10 << "\" y=\"" << mt + 16 * (c + 1) << "\" fill=\"" << color << "\">" << ys[c]
      << (logy ? " (log)" : "") << "</text>\n";
  }
  f << "</svg>\n";
}

nlohmann::json report_document(const ExperimentReport& rep, const RunConfig& cfg) {
  auto doc = rep.to_json();
  doc["config"] = cfg.canonical();
  doc["config_hash"] = cfg.hash();
  return doc;
}

void write_artifacts(const nlohmann::json& doc, const ExperimentReport& rep, const fs::path& dir) {
  fs::create_directories(dir);
  {
    auto f = open_out(dir / "report.json");
    f << doc.dump(2) << '\n';
  }
  // Quantities as a flat CSV too.
  {
    auto f = open_out(dir / "quantities.csv");
    f << "name,value,error,provenance,samples\n";
    for (const auto& q : rep.quantities)
      f << '"' << q.name << "\"," << format_number(q.value) << ',' << format_number(q.error) << ','
        << to_string(q.provenance) << ',' << q.samples << '\n';
  }
  for (const auto& [name, table] : rep.tables) {
    write_csv(table, dir / (safe_name(name) + ".csv"));
    if (table.rows.size() < 2) continue;
    if (name == "second_differences") {
      write_svg(table, "eps", {"D_N", "D_P", "D_gap"}, "second differences D(eps)", dir / "second_differences.svg");
      write_svg(table, "eps", {"G_over_eps2"}, "G(eps)/eps^2", dir / "seminorm_ratio.svg");
    } else if (table.columns.size() >= 2 && table.columns[1] == "best_value") {
      write_svg(table, "evaluation", {"best_value"}, name, dir / (safe_name(name) + ".svg"));
    } else if (name == "a_min") {
      Table finite{table.columns, {}};
      for (const auto& r : table.rows)
        if (std::isfinite(r[1])) finite.rows.push_back(r);
      if (finite.rows.size() >= 2) write_svg(finite, "B", {"A_min"}, "A_min(B)", dir / "a_min.svg");
    }
  }
}

void print_summary(const nlohmann::json& doc, std::ostream& out) {
  out << doc.at("experiment").get<std::string>() << "  config " << doc.at("config_hash").get<std::string>().substr(0, 12)
      << '\n';
  for (const auto& q : doc.at("quantities")) {
    out << "  " << q.at("name").get<std::string>() << " = ";
    const auto& v = q.at("value");
    if (v.is_number()) out << format_number(v.get<double>());
    else out << v.dump();
    if (q.contains("error") && q.at("error").is_number() && q.at("error").get<double>() > 0.0)
      out << " +- " << short_number(q.at("error").get<double>());
    out << "  [" << q.at("provenance").get<std::string>() << "]\n";
  }
  for (const auto& c : doc.at("checks")) {
    out << "  " << c.at("verdict").get<std::string>() << "  " << c.at("name").get<std::string>();
    if (c.contains("detail")) out << "  (" << c.at("detail").get<std::string>() << ")";
    out << '\n';
  }
  out << (doc.at("ok").get<bool>() ? "OK" : "FAILED") << '\n';
}

}  // namespace crsobolev::cli
