#include "parkocc/dataset/db.hpp"

#include <fstream>

#include "parkocc/error.hpp"

namespace parkocc::dataset {

namespace fs = std::filesystem;

RelationalDB::RelationalDB() {
  for (auto name : kTableNames) tables_[std::string(name)] = Json::array();
}

Json& RelationalDB::table(std::string_view name) {
  auto it = tables_.find(std::string(name));
  if (it == tables_.end()) throw Error("dataset", "unknown table " + std::string(name));
  index_.erase(std::string(name));
  return it->second;
}

const Json& RelationalDB::table(std::string_view name) const {
  auto it = tables_.find(std::string(name));
  if (it == tables_.end()) throw Error("dataset", "unknown table " + std::string(name));
  return it->second;
}

void RelationalDB::add(std::string_view table_name, Json row) {
  table(table_name).push_back(std::move(row));
}

const Json* RelationalDB::find(std::string_view table_name, std::string_view token) const {
  const Json& t = table(table_name);
  auto& idx = index_[std::string(table_name)];
  if (idx.size() != t.size()) {
    idx.clear();
    for (std::size_t i = 0; i < t.size(); ++i) {
      const auto& row = t[i];
      if (row.is_object() && row.contains("token") && row["token"].is_string()) {
        idx.emplace(row["token"].get<std::string>(), i);
      }
    }
    if (idx.size() != t.size()) {
      // Duplicate or missing tokens: fall back to a scan.
      for (const auto& row : t) {
        if (row.is_object() && row.contains("token") && row["token"] == token) return &row;
      }
      return nullptr;
    }
  }
  auto it = idx.find(std::string(token));
  return it == idx.end() ? nullptr : &t[it->second];
}

void RelationalDB::save(const fs::path& root) const {
  const fs::path dir = root / kVersionDir;
  fs::create_directories(dir);
  for (const auto& [name, rows] : tables_) {
    std::ofstream out(dir / (name + ".json"), std::ios::trunc);
    if (!out) throw IoError("cannot write table " + name);
    out << rows.dump(1, '\t') << '\n';
  }
}

RelationalDB RelationalDB::load(const fs::path& root, std::vector<std::string>* problems) {
  RelationalDB db;
  const fs::path dir = root / kVersionDir;
  for (auto name : kTableNames) {
    const fs::path p = dir / (std::string(name) + ".json");
    std::ifstream in(p);
    std::string problem;
    if (!in) {
      problem = "missing table " + std::string(name);
    } else {
      try {
        Json j = Json::parse(in);
        if (!j.is_array()) {
          problem = "table " + std::string(name) + " is not a JSON array";
        } else {
          db.tables_[std::string(name)] = std::move(j);
        }
      } catch (const nlohmann::json::exception& e) {
        problem = "unparsable table " + std::string(name) + ": " + e.what();
      }
    }
    if (!problem.empty()) {
      if (!problems) throw IoError(problem);
      problems->push_back(problem);
    }
  }
  return db;
}

}  // namespace parkocc::dataset
