#include "monsoon/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "monsoon/util.hpp"

namespace monsoon {

namespace {

std::string fmt(double v, const char* spec = "%.2f") {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

const char* variant_color(DatasetVariant v) {
  switch (v) {
    case DatasetVariant::D1: return "#4477aa";
    case DatasetVariant::D2: return "#ee6677";
    case DatasetVariant::D3: return "#228833";
    case DatasetVariant::D4: return "#ccbb44";
  }
  return "#000000";
}

struct SvgCanvas {
  std::string body;
  double width, height;

  SvgCanvas(double w, double h) : width(w), height(h) {
    body += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(w, "%.0f") +
            "\" height=\"" + fmt(h, "%.0f") + "\" viewBox=\"0 0 " + fmt(w, "%.0f") + " " +
            fmt(h, "%.0f") + "\">\n";
    body += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  }
  void line(double x1, double y1, double x2, double y2, const char* stroke = "#333333") {
    body += "<line x1=\"" + fmt(x1) + "\" y1=\"" + fmt(y1) + "\" x2=\"" + fmt(x2) + "\" y2=\"" +
            fmt(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"1\"/>\n";
  }
  void circle(double cx, double cy, double r, const std::string& fill, const std::string& title) {
    body += "<circle cx=\"" + fmt(cx) + "\" cy=\"" + fmt(cy) + "\" r=\"" + fmt(r) + "\" fill=\"" +
            fill + "\"><title>" + title + "</title></circle>\n";
  }
  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& title = "") {
    body += "<rect x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" width=\"" + fmt(w) + "\" height=\"" +
            fmt(h) + "\" fill=\"" + fill + "\">";
    if (!title.empty()) body += "<title>" + title + "</title>";
    body += "</rect>\n";
  }
  void text(double x, double y, const std::string& s, int size = 11,
            const char* anchor = "start") {
    body += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" font-family=\"sans-serif\" font-size=\"" +
            std::to_string(size) + "\" text-anchor=\"" + anchor + "\">" + s + "</text>\n";
  }
  std::string finish() { return body + "</svg>\n"; }
};

}  // namespace

void write_comparison_csv(const std::vector<MetricReport>& rows, const std::string& path) {
  std::string out = "model,variant,lookback,spearman,rmse_percent\n";
  for (const auto& r : rows) {
    out += r.model;
    out += ',';
    out += variant_name(r.variant);
    out += ',';
    if (r.lookback) out += std::to_string(*r.lookback);
    out += ',';
    if (r.ok()) {
      out += format_double(r.spearman);
      out += ',';
      out += format_double(r.rmse_percent);
    } else {
      out += ',';  // error rows carry no metrics
    }
    out += '\n';
  }
  write_text_file(path, out);
}

bool write_comparison_svg(const std::vector<MetricReport>& rows, const std::string& path) {
  std::vector<const MetricReport*> ok_rows;
  for (const auto& r : rows)
    if (r.ok()) ok_rows.push_back(&r);
  if (ok_rows.empty()) return false;

  const double W = 640, H = 480, ml = 60, mr = 20, mt = 30, mb = 50;
  double rmse_max = 0.0;
  for (const auto* r : ok_rows) rmse_max = std::max(rmse_max, r->rmse_percent);
  if (rmse_max <= 0.0) rmse_max = 1.0;
  rmse_max *= 1.1;

  auto sx = [&](double spearman_v) { return ml + (spearman_v + 1.0) / 2.0 * (W - ml - mr); };
  auto sy = [&](double rmse_v) { return H - mb - rmse_v / rmse_max * (H - mt - mb); };

  SvgCanvas svg(W, H);
  svg.line(ml, H - mb, W - mr, H - mb);
  svg.line(ml, mt, ml, H - mb);
  for (int i = -2; i <= 2; ++i) {
    const double v = i / 2.0;
    svg.line(sx(v), H - mb, sx(v), H - mb + 4);
    svg.text(sx(v), H - mb + 18, fmt(v, "%.1f"), 10, "middle");
  }
  for (int i = 0; i <= 4; ++i) {
    const double v = rmse_max * i / 4.0;
    svg.line(ml - 4, sy(v), ml, sy(v));
    svg.text(ml - 8, sy(v) + 4, fmt(v, "%.2f"), 10, "end");
  }
  svg.text((ml + W - mr) / 2, H - 12, "Spearman correlation", 12, "middle");
  svg.text(16, mt - 10, "RMSE %", 12);
  for (const auto* r : ok_rows) {
    const std::string title = r->model + " " + variant_name(r->variant) +
                              (r->lookback ? " L" + std::to_string(*r->lookback) : "");
    svg.circle(sx(r->spearman), sy(r->rmse_percent), 4.0, variant_color(r->variant), title);
  }
  double ly = mt + 6;
  for (DatasetVariant v : all_variants()) {
    svg.circle(W - mr - 90, ly, 4.0, variant_color(v), variant_name(v));
    svg.text(W - mr - 80, ly + 4, variant_long_name(v), 10);
    ly += 16;
  }
  write_text_file(path, svg.finish());
  return true;
}

void write_anomaly_csv(const AnomalySeries& series, const std::string& path) {
  std::string out = "year,obs_total_mm,pred_total_mm,obs_anom_mm,pred_anom_mm\n";
  for (const auto& r : series.rows) {
    out += std::to_string(r.year) + ',' + format_double(r.obs_total) + ',' +
           format_double(r.pred_total) + ',' + format_double(r.obs_anom) + ',' +
           format_double(r.pred_anom) + '\n';
  }
  write_text_file(path, out);
}

bool write_anomaly_svg(const AnomalySeries& series, const std::string& path) {
  if (series.rows.empty()) return false;
  const double W = 720, H = 420, ml = 60, mr = 20, mt = 30, mb = 50;
  double amax = 1.0;
  for (const auto& r : series.rows)
    amax = std::max({amax, std::abs(r.obs_anom), std::abs(r.pred_anom)});
  amax *= 1.1;

  const double zero_y = mt + (H - mt - mb) / 2.0;
  auto sy = [&](double anom) { return zero_y - anom / amax * (H - mt - mb) / 2.0; };
  const double group = (W - ml - mr) / static_cast<double>(series.rows.size());
  const double bar = group * 0.35;

  SvgCanvas svg(W, H);
  svg.line(ml, zero_y, W - mr, zero_y);
  svg.line(ml, mt, ml, H - mb);
  svg.text(16, mt - 10, "anomaly (mm)", 12);
  for (int i = -2; i <= 2; ++i) {
    const double v = amax * i / 2.0;
    svg.line(ml - 4, sy(v), ml, sy(v));
    svg.text(ml - 8, sy(v) + 4, fmt(v, "%.0f"), 10, "end");
  }
  for (std::size_t i = 0; i < series.rows.size(); ++i) {
    const auto& r = series.rows[i];
    const double x0 = ml + group * static_cast<double>(i) + group * 0.12;
    auto draw = [&](double x, double anom, const char* color, const char* kind) {
      const double top = std::min(sy(anom), zero_y);
      const double h = std::abs(sy(anom) - zero_y);
      svg.rect(x, top, bar, h, color,
               std::to_string(r.year) + " " + kind + " " + fmt(anom, "%.1f") + " mm");
    };
    draw(x0, r.obs_anom, "#888888", "observed");
    draw(x0 + bar, r.pred_anom, "#4477aa", "predicted");
    svg.text(x0 + bar, H - mb + 16, std::to_string(r.year), 9, "middle");
  }
  svg.rect(W - mr - 150, mt, 10, 10, "#888888");
  svg.text(W - mr - 135, mt + 9, "observed", 10);
  svg.rect(W - mr - 150, mt + 16, 10, 10, "#4477aa");
  svg.text(W - mr - 135, mt + 25, "predicted", 10);
  write_text_file(path, svg.finish());
  return true;
}

void write_loss_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
  std::string out = "epoch,train_loss,val_loss\n";
  for (const auto& e : history) {
    out += std::to_string(e.epoch) + ',' + format_double(e.train_loss) + ',' +
           format_double(e.val_loss) + '\n';
  }
  write_text_file(path, out);
}

void write_trials_csv(const std::vector<TrialResult>& trials,
                      const std::vector<std::string>& axis_names, const std::string& path) {
  std::string out = "trial_id";
  for (const auto& name : axis_names) out += ',' + name;
  out += ",best_val_loss,epochs,seconds,error\n";
  for (const auto& t : trials) {
    out += std::to_string(t.trial_id);
    for (const auto& name : axis_names) {
      out += ',';
      auto it = t.point.find(name);
      if (it != t.point.end()) out += format_double(it->second);
    }
    out += ',';
    if (t.ok()) out += format_double(t.best_val_loss);
    out += ',' + std::to_string(t.epochs_run) + ',' + fmt(t.seconds, "%.3f") + ',';
    out += t.error;
    out += '\n';
  }
  write_text_file(path, out);
}

}  // namespace monsoon
