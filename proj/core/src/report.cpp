#include "icp/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <nlohmann/json.hpp>

namespace icp {

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string px(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

}  // namespace

std::string survival_csv(std::span<const SurvivalEstimate> estimates) {
  std::string out = "lambda,runs,alive,p_hat,wilson_lo,wilson_hi,horizon\n";
  for (const auto& e : estimates) {
    out += num(e.lambda) + ',' + std::to_string(e.runs) + ',' + std::to_string(e.alive) + ',' + num(e.p_hat) +
           ',' + num(e.wilson_lo) + ',' + num(e.wilson_hi) + ',' + num(e.horizon) + '\n';
  }
  return out;
}

std::string survival_json(std::span<const SurvivalEstimate> estimates) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  for (const auto& e : estimates) {
    nlohmann::ordered_json j;
    j["lambda"] = e.lambda;
    j["runs"] = e.runs;
    j["alive"] = e.alive;
    j["p_hat"] = e.p_hat;
    j["wilson_lo"] = e.wilson_lo;
    j["wilson_hi"] = e.wilson_hi;
    j["horizon"] = e.horizon;
    j["right_cutoff"] = e.right_cutoff ? nlohmann::ordered_json(*e.right_cutoff) : nlohmann::ordered_json(nullptr);
    j["ci_level"] = e.ci_level;
    arr.push_back(std::move(j));
  }
  return nlohmann::ordered_json{{"estimates", std::move(arr)}}.dump(2) + '\n';
}

std::vector<SurvivalEstimate> parse_survival_json(std::string_view text) {
  const auto doc = nlohmann::json::parse(text);
  std::vector<SurvivalEstimate> out;
  for (const auto& j : doc.at("estimates")) {
    SurvivalEstimate e;
    e.lambda = j.at("lambda").get<double>();
    e.runs = j.at("runs").get<std::uint64_t>();
    e.alive = j.at("alive").get<std::uint64_t>();
    e.p_hat = j.at("p_hat").get<double>();
    e.wilson_lo = j.at("wilson_lo").get<double>();
    e.wilson_hi = j.at("wilson_hi").get<double>();
    e.horizon = j.at("horizon").get<double>();
    if (!j.at("right_cutoff").is_null()) e.right_cutoff = j.at("right_cutoff").get<Site>();
    e.ci_level = j.at("ci_level").get<double>();
    out.push_back(e);
  }
  return out;
}

std::string survival_svg(std::span<const SurvivalEstimate> estimates) {
  constexpr double W = 640, H = 400, L = 60, R = 20, T = 20, B = 50;
  double xmin = 0.0, xmax = 1.0;
  if (!estimates.empty()) {
    auto [a, b] = std::minmax_element(estimates.begin(), estimates.end(),
                                      [](const auto& x, const auto& y) { return x.lambda < y.lambda; });
    xmin = a->lambda;
    xmax = b->lambda;
    if (xmax <= xmin) {
      xmin -= 0.5;
      xmax += 0.5;
    }
  }
  auto sx = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
  auto sy = [&](double y) { return H - B - y * (H - T - B); };

  std::string s;
  s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + px(W) + "\" height=\"" + px(H) + "\">\n";
  s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s += "<line x1=\"" + px(L) + "\" y1=\"" + px(sy(0)) + "\" x2=\"" + px(W - R) + "\" y2=\"" + px(sy(0)) +
       "\" stroke=\"black\"/>\n";
  s += "<line x1=\"" + px(L) + "\" y1=\"" + px(sy(0)) + "\" x2=\"" + px(L) + "\" y2=\"" + px(sy(1)) +
       "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = i / 4.0;
    s += "<text x=\"" + px(L - 8) + "\" y=\"" + px(sy(y) + 4) + "\" font-size=\"11\" text-anchor=\"end\">" +
         px(y) + "</text>\n";
  }
  for (const auto& e : estimates) {
    s += "<text x=\"" + px(sx(e.lambda)) + "\" y=\"" + px(H - B + 16) +
         "\" font-size=\"11\" text-anchor=\"middle\">" + num(e.lambda) + "</text>\n";
  }
  s += "<text x=\"" + px((W + L - R) / 2) + "\" y=\"" + px(H - 10) +
       "\" font-size=\"13\" text-anchor=\"middle\">lambda</text>\n";
  s += "<text x=\"15\" y=\"" + px((H - B + T) / 2) + "\" font-size=\"13\" transform=\"rotate(-90 15 " +
       px((H - B + T) / 2) + ")\" text-anchor=\"middle\">survival probability</text>\n";

  std::string path;
  for (const auto& e : estimates) {
    const double x = sx(e.lambda);
    s += "<line x1=\"" + px(x) + "\" y1=\"" + px(sy(e.wilson_lo)) + "\" x2=\"" + px(x) + "\" y2=\"" +
         px(sy(e.wilson_hi)) + "\" stroke=\"steelblue\"/>\n";
    s += "<circle cx=\"" + px(x) + "\" cy=\"" + px(sy(e.p_hat)) + "\" r=\"3\" fill=\"steelblue\"/>\n";
    path += (path.empty() ? "M" : " L") + px(x) + ',' + px(sy(e.p_hat));
  }
  if (!path.empty()) s += "<path d=\"" + path + "\" fill=\"none\" stroke=\"steelblue\"/>\n";
  s += "</svg>\n";
  return s;
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ReportError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw ReportError("failed writing " + path.string());
}

std::vector<std::filesystem::path> emit_report(std::span<const SurvivalEstimate> estimates,
                                               const ReportFormats& formats, const std::filesystem::path& dir,
                                               std::string_view stem) {
  if (estimates.empty()) throw std::invalid_argument("emit_report: no results to write");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ReportError("cannot create output directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  auto emit = [&](bool on, const char* ext, const std::string& text) {
    if (!on) return;
    auto p = dir / (std::string(stem) + ext);
    write_text_file(p, text);
    written.push_back(std::move(p));
  };
  emit(formats.csv, ".csv", survival_csv(estimates));
  emit(formats.json, ".json", survival_json(estimates));
  emit(formats.svg, ".svg", survival_svg(estimates));
  return written;
}

}  // namespace icp
