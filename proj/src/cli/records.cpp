#include "slv/records.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <sstream>

#include "slv/errors.hpp"

namespace slv::io {

double round_coordinate(double v) { return std::round(v * 100.0) / 100.0; }

double round_significant(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  // Shortest-round-trip printing of the %.6g text keeps files compact.
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return std::strtod(buf, nullptr);
}

namespace {

template <typename T>
T field(const json& j, const char* name) {
  if (!j.contains(name)) throw FormatError(std::string("missing field '") + name + "'");
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("field '") + name + "': " + e.what());
  }
}

json box_to_json(const Box& b) {
  return json::array({round_coordinate(b.x_min), round_coordinate(b.y_min),
                      round_coordinate(b.x_max), round_coordinate(b.y_max)});
}

Box box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw FormatError("box must be [x0, y0, x1, y1]");
  Box b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  if (!b.valid()) throw FormatError("box has min > max");
  return b;
}

json matrix_to_json(const ScoreMatrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (double v : m.row(r)) row.push_back(round_significant(v));
    rows.push_back(std::move(row));
  }
  return rows;
}

ScoreMatrix matrix_from_json(const json& j, const char* name) {
  if (!j.is_array()) throw FormatError(std::string("field '") + name + "' must be a matrix");
  const std::size_t rows = j.size();
  const std::size_t cols = rows == 0 ? 0 : j[0].size();
  std::vector<double> data;
  data.reserve(rows * cols);
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != cols) {
      throw FormatError(std::string("field '") + name + "' has ragged rows");
    }
    for (const auto& v : row) data.push_back(v.get<double>());
  }
  return ScoreMatrix(rows, cols, std::move(data));
}

std::optional<ScoreMatrix> optional_matrix(const json& j, const char* name) {
  if (!j.contains(name)) return std::nullopt;
  return matrix_from_json(j.at(name), name);
}

void check_shape(const ScoreMatrix& m, std::size_t rows, std::size_t cols, const char* name) {
  if (m.rows() != rows || m.cols() != cols) {
    std::ostringstream os;
    os << "field '" << name << "' is " << m.rows() << "x" << m.cols() << ", expected " << rows
       << "x" << cols;
    throw FormatError(os.str());
  }
}

}  // namespace

ScoreMatrix Scene::average_scores() const {
  if (scores) return *scores;
  if (branch_scores.empty()) throw FormatError("missing field 'scores'");
  const std::size_t c = num_classes();
  const std::size_t r = proposals.size();
  ScoreMatrix avg(c, r);
  for (const auto& branch : branch_scores) {
    for (std::size_t i = 0; i < c; ++i) {
      for (std::size_t k = 0; k < r; ++k) avg(i, k) += branch(i, k);
    }
  }
  for (double& v : avg.data()) v /= static_cast<double>(branch_scores.size());
  return avg;
}

void Scene::validate() const {
  if (!dims.valid()) throw FormatError("image dims must be positive");
  for (int v : labels) {
    if (v != 0 && v != 1) throw FormatError("labels must be 0 or 1");
  }
  const std::size_t c = num_classes();
  const std::size_t r = proposals.size();
  for (const Box& b : proposals) {
    if (!inside(b, dims)) throw FormatError("proposal lies outside the image");
  }
  for (const auto& g : gt) {
    if (g.class_id < 0 || static_cast<std::size_t>(g.class_id) >= c) {
      throw FormatError("gt class out of range");
    }
  }
  if (scores) check_shape(*scores, c, r, "scores");
  if (cls_logits) check_shape(*cls_logits, c, r, "cls_logits");
  if (det_logits) check_shape(*det_logits, c, r, "det_logits");
  for (const auto& b : branch_scores) check_shape(b, c + 1, r, "branch_scores");
  if (refine_scores) check_shape(*refine_scores, c + 1, r, "refine_scores");
  if (reg_deltas) check_shape(*reg_deltas, 4 * (c + 1), r, "reg_deltas");
}

json scene_to_json(const Scene& s) {
  json j;
  j["image_id"] = s.image_id;
  j["width"] = s.dims.width;
  j["height"] = s.dims.height;
  j["labels"] = s.labels;
  json props = json::array();
  for (const Box& b : s.proposals) props.push_back(box_to_json(b));
  j["proposals"] = std::move(props);
  if (s.scores) j["scores"] = matrix_to_json(*s.scores);
  if (!s.gt.empty()) {
    json gt = json::array();
    for (const auto& g : s.gt) gt.push_back({{"class", g.class_id}, {"box", box_to_json(g.box)}});
    j["gt"] = std::move(gt);
  }
  if (s.cls_logits) j["cls_logits"] = matrix_to_json(*s.cls_logits);
  if (s.det_logits) j["det_logits"] = matrix_to_json(*s.det_logits);
  if (!s.branch_scores.empty()) {
    json branches = json::array();
    for (const auto& b : s.branch_scores) branches.push_back(matrix_to_json(b));
    j["branch_scores"] = std::move(branches);
  }
  if (s.refine_scores) j["refine_scores"] = matrix_to_json(*s.refine_scores);
  if (s.reg_deltas) j["reg_deltas"] = matrix_to_json(*s.reg_deltas);
  if (s.features) {
    json values = json::array();
    for (double v : s.features->values()) values.push_back(round_significant(v));
    j["features"] = {{"height", s.features->height()},
                     {"width", s.features->width()},
                     {"depth", s.features->depth()},
                     {"values", std::move(values)}};
  }
  return j;
}

Scene scene_from_json(const json& j) {
  if (!j.is_object()) throw FormatError("record is not a JSON object");
  Scene s;
  s.image_id = field<std::string>(j, "image_id");
  s.dims.width = field<std::size_t>(j, "width");
  s.dims.height = field<std::size_t>(j, "height");
  s.labels = field<std::vector<int>>(j, "labels");
  if (!j.contains("proposals")) throw FormatError("missing field 'proposals'");
  for (const auto& b : j.at("proposals")) s.proposals.push_back(box_from_json(b));
  s.scores = optional_matrix(j, "scores");
  if (j.contains("gt")) {
    for (const auto& g : j.at("gt")) {
      s.gt.push_back({field<int>(g, "class"), box_from_json(g.at("box"))});
    }
  }
  s.cls_logits = optional_matrix(j, "cls_logits");
  s.det_logits = optional_matrix(j, "det_logits");
  if (j.contains("branch_scores")) {
    for (const auto& b : j.at("branch_scores")) {
      s.branch_scores.push_back(matrix_from_json(b, "branch_scores"));
    }
  }
  s.refine_scores = optional_matrix(j, "refine_scores");
  s.reg_deltas = optional_matrix(j, "reg_deltas");
  if (j.contains("features")) {
    const json& f = j.at("features");
    try {
      s.features.emplace(field<std::size_t>(f, "height"), field<std::size_t>(f, "width"),
                         field<std::size_t>(f, "depth"),
                         field<std::vector<double>>(f, "values"));
    } catch (const ContractError& e) {
      throw FormatError(std::string("field 'features': ") + e.what());
    }
  }
  try {
    s.validate();
  } catch (const ContractError& e) {
    throw FormatError(e.what());
  }
  return s;
}

json supervision_to_json(const Supervision& sup) {
  json entries = json::array();
  for (const auto& e : sup.entries) {
    json boxes = json::array();
    json scores = json::array();
    for (const auto& pb : e.boxes) {
      boxes.push_back(box_to_json(pb.box));
      scores.push_back(round_significant(pb.peak));
    }
    entries.push_back({{"class", e.class_id}, {"boxes", std::move(boxes)}, {"scores", std::move(scores)}});
  }
  return {{"image_id", sup.image_id}, {"entries", std::move(entries)}};
}

Supervision supervision_from_json(const json& j) {
  Supervision sup;
  sup.image_id = field<std::string>(j, "image_id");
  if (!j.contains("entries")) throw FormatError("missing field 'entries'");
  for (const auto& e : j.at("entries")) {
    ClassBoxes cb;
    cb.class_id = field<int>(e, "class");
    const json& boxes = e.at("boxes");
    const bool has_scores = e.contains("scores");
    if (has_scores && e.at("scores").size() != boxes.size()) {
      throw FormatError("'scores' and 'boxes' differ in length");
    }
    for (std::size_t k = 0; k < boxes.size(); ++k) {
      cb.boxes.push_back({box_from_json(boxes[k]), has_scores ? e.at("scores")[k].get<double>() : 1.0});
    }
    sup.entries.push_back(std::move(cb));
  }
  return sup;
}

json ground_truth_to_json(const std::string& image_id, const std::vector<LabeledBox>& gt) {
  std::map<int, json> by_class;
  for (const auto& g : gt) {
    auto& boxes = by_class[g.class_id];
    if (boxes.is_null()) boxes = json::array();
    boxes.push_back(box_to_json(g.box));
  }
  json entries = json::array();
  for (auto& [c, boxes] : by_class) entries.push_back({{"class", c}, {"boxes", std::move(boxes)}});
  return {{"image_id", image_id}, {"entries", std::move(entries)}};
}

void append_detections(const json& record, std::vector<Detection>& out) {
  const Supervision sup = supervision_from_json(record);
  for (const auto& e : sup.entries) {
    for (const auto& pb : e.boxes) out.push_back({sup.image_id, e.class_id, pb.box, pb.peak});
  }
}

void append_ground_truth(const json& record, std::vector<GroundTruth>& out) {
  if (record.contains("entries")) {
    const Supervision sup = supervision_from_json(record);
    for (const auto& e : sup.entries) {
      for (const auto& pb : e.boxes) out.push_back({sup.image_id, e.class_id, pb.box});
    }
    return;
  }
  const std::string image_id = field<std::string>(record, "image_id");
  if (!record.contains("gt")) throw FormatError("record carries neither 'entries' nor 'gt'");
  for (const auto& g : record.at("gt")) {
    out.push_back({image_id, field<int>(g, "class"), box_from_json(g.at("box"))});
  }
}

std::string dump_line(const json& j) { return j.dump(); }

std::vector<Line> read_lines(std::istream& is) {
  std::vector<Line> out;
  std::string text;
  std::size_t number = 0;
  while (std::getline(is, text)) {
    ++number;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.push_back({number, std::move(text)});
  }
  return out;
}

std::vector<std::string> read_class_names(std::istream& is) {
  try {
    return json::parse(is).get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("class vocabulary: ") + e.what());
  }
}

}  // namespace slv::io
