#pragma once

// Report serialization: the JSON container, its CSV mirror, per-repeat ROC
// point dumps, and small static SVG plots rendered straight from the rows.

#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "spoofbench/bench.hpp"
#include "spoofbench/util.hpp"

namespace spoofbench {

using json = nlohmann::ordered_json;

inline json report_to_json(const ExperimentReport& report) {
  json j;
  j["config"] = report.config_echo;
  j["feature_set"] = report.feature_set;
  j["attack"] = report.attack;
  j["frozen_tpr"] = report.frozen_tpr;
  j["rows"] = json::array();
  for (const auto& r : report.rows) {
    json row;
    row["model"] = r.model;
    row["feature_set"] = r.feature_set;
    row["attack"] = r.attack;
    row["level"] = r.level;
    row["fpr_target"] = r.fpr_target;
    row["tpr_mean"] = r.tpr_mean;
    row["tpr_std"] = r.tpr_std;
    row["fpr_at_frozen_tpr"] = r.fpr_at_frozen_tpr;
    row["auc_mean"] = r.auc_mean;
    row["asr"] = r.asr ? json(*r.asr) : json(nullptr);
    row["pearson_r"] = r.pearson_r ? json(*r.pearson_r) : json(nullptr);
    row["pearson_p"] = r.pearson_p ? json(*r.pearson_p) : json(nullptr);
    j["rows"].push_back(std::move(row));
  }
  return j;
}

inline std::string report_to_csv(const ExperimentReport& report) {
  std::string out =
      "model,feature_set,attack,level,fpr_target,tpr_mean,tpr_std,"
      "fpr_at_frozen_tpr,auc_mean,asr,pearson_r,pearson_p\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
  };
  for (const auto& r : report.rows) {
    out += r.model + "," + r.feature_set + "," + r.attack + "," + num(r.level) + "," +
           num(r.fpr_target) + "," + num(r.tpr_mean) + "," + num(r.tpr_std) + "," +
           num(r.fpr_at_frozen_tpr) + "," + num(r.auc_mean) + ",";
    out += (r.asr ? num(*r.asr) : "") + std::string(",");
    out += (r.pearson_r ? num(*r.pearson_r) : "") + std::string(",");
    out += (r.pearson_p ? num(*r.pearson_p) : "") + std::string("\n");
  }
  return out;
}

inline void write_roc_csvs(const ExperimentReport& report,
                           const std::filesystem::path& dir) {
  char buf[64];
  for (const auto& rec : report.rocs) {
    std::snprintf(buf, sizeof(buf), "roc_%s_%g_%zu.csv", rec.model.c_str(), rec.level,
                  rec.repeat);
    std::string out = "fpr,tpr,threshold\n";
    char line[128];
    for (const auto& p : rec.roc.points) {
      std::snprintf(line, sizeof(line), "%.12g,%.12g,%.12g\n", p.fpr, p.tpr, p.threshold);
      out += line;
    }
    atomic_write(dir / buf, out);
  }
}

// ---- minimal SVG line plots -------------------------------------------------

namespace svg_detail {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

inline const char* series_color(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                 "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
  return colors[i % 8];
}

inline std::string line_plot(const std::vector<Series>& series, const std::string& title,
                             const std::string& xlabel, const std::string& ylabel,
                             double xmax, double ymax) {
  const int w = 520, h = 400, ml = 60, mb = 50, mt = 40, mr = 20;
  auto px = [&](double x) { return ml + x / xmax * (w - ml - mr); };
  auto py = [&](double y) { return h - mb - y / ymax * (h - mb - mt); };
  char buf[256];
  std::string out;
  std::snprintf(buf, sizeof(buf),
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\">\n",
                w, h);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%d\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">%s"
                "</text>\n",
                ml, title.c_str());
  out += buf;
  // axes
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", ml,
                h - mb, w - mr, h - mb);
  out += buf;
  std::snprintf(buf, sizeof(buf),
                "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", ml,
                mt, ml, h - mb);
  out += buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" font-size=\"12\">%s"
                "</text>\n",
                (w - ml) / 2, h - 12, xlabel.c_str());
  out += buf;
  std::snprintf(buf, sizeof(buf),
                "<text x=\"14\" y=\"%d\" font-family=\"sans-serif\" font-size=\"12\" "
                "transform=\"rotate(-90 14 %d)\">%s</text>\n",
                (h + mt) / 2, (h + mt) / 2, ylabel.c_str());
  out += buf;
  for (int tick = 0; tick <= 4; ++tick) {
    double fx = xmax * tick / 4.0, fy = ymax * tick / 4.0;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.0f\" y=\"%d\" font-family=\"sans-serif\" font-size=\"10\" "
                  "text-anchor=\"middle\">%.3g</text>\n",
                  px(fx), h - mb + 16, fx);
    out += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%.0f\" font-family=\"sans-serif\" font-size=\"10\" "
                  "text-anchor=\"end\">%.3g</text>\n",
                  ml - 6, py(fy) + 4, fy);
    out += buf;
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    std::string pts;
    for (const auto& [x, y] : series[s].points) {
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f ", px(x), py(y));
      pts += buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "<polyline fill=\"none\" stroke=\"%s\" stroke-width=\"1.5\" "
                  "points=\"%s\"/>\n",
                  series_color(s), pts.c_str());
    out += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" font-size=\"11\" "
                  "fill=\"%s\">%s</text>\n",
                  w - mr - 120, mt + 16 * static_cast<int>(s) + 4, series_color(s),
                  series[s].label.c_str());
    out += buf;
  }
  out += "</svg>\n";
  return out;
}

}  // namespace svg_detail

// ROC overlays (repeat 0 of each level, per model) and the TPR-vs-level line
// chart at the largest configured FPR target.
inline void write_svg_plots(const ExperimentReport& report,
                            const std::filesystem::path& dir) {
  std::vector<std::string> models;
  for (const auto& r : report.rows)
    if (std::find(models.begin(), models.end(), r.model) == models.end())
      models.push_back(r.model);

  for (const auto& model : models) {
    std::vector<svg_detail::Series> series;
    for (const auto& rec : report.rocs) {
      if (rec.model != model || rec.repeat != 0) continue;
      svg_detail::Series s;
      char lbl[48];
      std::snprintf(lbl, sizeof(lbl), "level %g", rec.level);
      s.label = lbl;
      for (const auto& p : rec.roc.points) s.points.emplace_back(p.fpr, p.tpr);
      series.push_back(std::move(s));
    }
    if (series.empty()) continue;
    atomic_write(dir / ("roc_" + model + ".svg"),
                 svg_detail::line_plot(series, "ROC (" + model + ", repeat 0)", "FPR",
                                       "TPR", 1.0, 1.0));
  }

  double alpha = 0.0;
  for (const auto& r : report.rows) alpha = std::max(alpha, r.fpr_target);
  double max_level = 0.0;
  for (const auto& r : report.rows) max_level = std::max(max_level, r.level);
  if (max_level > 0.0) {
    std::vector<svg_detail::Series> series;
    for (const auto& model : models) {
      svg_detail::Series s;
      s.label = model;
      for (const auto& r : report.rows)
        if (r.model == model && r.fpr_target == alpha)
          s.points.emplace_back(r.level, r.tpr_mean);
      series.push_back(std::move(s));
    }
    char title[80];
    std::snprintf(title, sizeof(title), "Mean TPR at FPR=%g vs attack level", alpha);
    atomic_write(dir / "tpr_vs_level.svg",
                 svg_detail::line_plot(series, title, "attack level", "mean TPR",
                                       max_level, 1.0));
  }
}

}  // namespace spoofbench
