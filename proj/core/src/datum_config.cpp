#include <fstream>
#include <sstream>

#include "json.hpp"
#include "soergel/coxeter.hpp"

namespace soergel {

// {"label": "B2", "cartan": [[2,-1],[-2,2]]}
CoxeterDatum CoxeterDatum::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open Cartan file '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw ConfigError("bad Cartan file: " + std::string(e.what()));
  }
  if (!doc.contains("cartan") || !doc["cartan"].is_array())
    throw ConfigError("Cartan file needs a 'cartan' matrix");
  auto rows = doc["cartan"];
  int rank = static_cast<int>(rows.size());
  std::vector<long long> a;
  for (auto& row : rows) {
    if (!row.is_array() || static_cast<int>(row.size()) != rank)
      throw ConfigError("Cartan matrix must be square");
    for (auto& v : row) a.push_back(v.get<long long>());
  }
  std::string label = doc.value("label", "custom");
  return CoxeterDatum(label, rank, std::move(a));
}

}  // namespace soergel
