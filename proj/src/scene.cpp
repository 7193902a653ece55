#include "pankit/scene.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace pankit {

using json = nlohmann::json;

std::size_t Scene::text_count() const
{
  return static_cast<std::size_t>(
      std::count_if(polygons.begin(), polygons.end(), [](const Polygon& p) { return !p.ignore; }));
}

std::string scene_to_json(const Scene& scene)
{
  json polys = json::array();
  for (const auto& p : scene.polygons) {
    json pts = json::array();
    for (const auto& v : p.points)
      pts.push_back({v.x(), v.y()});
    polys.push_back({{"points", pts}, {"ignore", p.ignore}});
  }
  json j{{"width", scene.width},     {"height", scene.height}, {"seed", scene.seed},
         {"adjacent", scene.adjacent}, {"polygons", polys}};
  return j.dump(2);
}

Scene scene_from_json(const std::string& text)
{
  const json j = json::parse(text);
  Scene s;
  s.width = j.at("width").get<int>();
  s.height = j.at("height").get<int>();
  s.seed = j.value("seed", std::uint64_t{0});
  s.adjacent = j.value("adjacent", false);
  for (const auto& jp : j.at("polygons")) {
    Polygon p;
    p.ignore = jp.value("ignore", false);
    for (const auto& v : jp.at("points"))
      p.points.emplace_back(v.at(0).get<float>(), v.at(1).get<float>());
    s.polygons.push_back(normalized(std::move(p)));
  }
  return s;
}

std::vector<Polygon> parse_ctw1500(const std::string& text)
{
  std::vector<Polygon> out;
  std::istringstream lines(text);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos)
      continue;
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ','))
      fields.push_back(field);
    Polygon p;
    if (!fields.empty() && fields.back().find("###") != std::string::npos) {
      p.ignore = true;
      fields.pop_back();
    }
    const auto fail = [&](const std::string& why) {
      throw std::runtime_error("annotation line " + std::to_string(line_no) + ": " + why);
    };
    if (fields.size() < 6 || fields.size() % 2 != 0)
      fail("expected an even number (>= 6) of integers, got " + std::to_string(fields.size()));
    std::vector<int> values;
    for (const auto& f : fields) {
      std::size_t used = 0;
      int v = 0;
      try {
        v = std::stoi(f, &used);
      } catch (const std::exception&) {
        fail("'" + f + "' is not an integer");
      }
      if (f.find_first_not_of(" \t", used) != std::string::npos)
        fail("'" + f + "' is not an integer");
      values.push_back(v);
    }
    for (std::size_t i = 0; i < values.size(); i += 2)
      p.points.emplace_back(static_cast<float>(values[i]), static_cast<float>(values[i + 1]));
    try {
      out.push_back(normalized(std::move(p)));
    } catch (const std::invalid_argument& e) {
      fail(e.what());
    }
  }
  return out;
}

Scene load_annotations(const std::filesystem::path& path, int default_width, int default_height)
{
  std::ifstream is(path);
  if (!is)
    throw std::runtime_error("cannot open " + path.string());
  std::stringstream buf;
  buf << is.rdbuf();
  if (path.extension() == ".json")
    return scene_from_json(buf.str());
  Scene s;
  s.width = default_width;
  s.height = default_height;
  s.polygons = parse_ctw1500(buf.str());
  return s;
}

} // namespace pankit
