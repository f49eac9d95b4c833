#pragma once

// Reports: a human-readable table, then key=value lines, then one JSON
// document.  Field order is insertion order, so identical runs print
// identical bytes.

#include "json.hpp"

#include "ellgamma/descriptors.hpp"

namespace ellgamma {

class Report {
 public:
  using Json = nlohmann::ordered_json;

  explicit Report(std::string command) : command_(std::move(command)) {}

  void field(const std::string& key, const std::string& value) {
    fields_.emplace_back(key, value);
    json_[key] = value;
  }
  void field(const std::string& key, const char* value) { field(key, std::string(value)); }
  void field(const std::string& key, bool value) {
    fields_.emplace_back(key, value ? "true" : "false");
    json_[key] = value;
  }
  void field(const std::string& key, long long value) {
    fields_.emplace_back(key, std::to_string(value));
    json_[key] = value;
  }
  void field(const std::string& key, int value) { field(key, static_cast<long long>(value)); }

  /// A table with named columns; rows also go to key=value as key.i.col.
  void table(const std::string& key, std::vector<std::string> columns, std::vector<std::vector<std::string>> rows) {
    Json arr = Json::array();
    for (const auto& r : rows) {
      Json o = Json::object();
      for (std::size_t c = 0; c < columns.size(); ++c) o[columns[c]] = r[c];
      arr.push_back(std::move(o));
    }
    json_[key] = std::move(arr);
    tables_.push_back({key, std::move(columns), std::move(rows)});
  }

  void status(bool pass) { pass_ = pass; }
  bool passed() const { return pass_; }

  std::string render(const std::string& format = "all") const {
    std::ostringstream os;
    if (format == "all" || format == "table") {
      os << "== " << command_ << " ==\n";
      std::size_t w = 6;
      for (const auto& [k, v] : fields_) w = std::max(w, k.size());
      os << pad("status", w) << "  " << (pass_ ? "pass" : "fail") << '\n';
      for (const auto& [k, v] : fields_) os << pad(k, w) << "  " << v << '\n';
      for (const auto& t : tables_) {
        os << '\n' << t.key << ":\n";
        std::vector<std::size_t> cw(t.columns.size());
        for (std::size_t c = 0; c < cw.size(); ++c) {
          cw[c] = t.columns[c].size();
          for (const auto& r : t.rows) cw[c] = std::max(cw[c], r[c].size());
        }
        auto line = [&](const std::vector<std::string>& r) {
          os << " ";
          for (std::size_t c = 0; c < r.size(); ++c) os << ' ' << (c + 1 < r.size() ? pad(r[c], cw[c]) : r[c]);
          os << '\n';
        };
        line(t.columns);
        for (const auto& r : t.rows) line(r);
      }
    }
    if (format == "all" || format == "kv") {
      if (format == "all") os << "\n--- key=value ---\n";
      os << "command=" << command_ << '\n' << "status=" << (pass_ ? "pass" : "fail") << '\n';
      for (const auto& [k, v] : fields_) os << k << '=' << v << '\n';
      for (const auto& t : tables_)
        for (std::size_t i = 0; i < t.rows.size(); ++i)
          for (std::size_t c = 0; c < t.columns.size(); ++c)
            os << t.key << '.' << i << '.' << t.columns[c] << '=' << t.rows[i][c] << '\n';
    }
    if (format == "all" || format == "json") {
      if (format == "all") os << "\n--- json ---\n";
      Json j = Json::object();
      j["command"] = command_;
      j["status"] = pass_ ? "pass" : "fail";
      for (const auto& [k, v] : json_.items()) j[k] = v;
      os << j.dump(2) << '\n';
    }
    return os.str();
  }

 private:
  struct Table {
    std::string key;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
  };
  std::string command_;
  std::vector<std::pair<std::string, std::string>> fields_;
  std::vector<Table> tables_;
  Json json_ = Json::object();
  bool pass_ = true;

  static std::string pad(const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); }
};

// ---------------------------------------------------------------------------
// Report builders shared by the CLI, demos and acceptance checks

inline std::string coefficient_list(const std::vector<Element>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + v[i].str();
  return s;
}

inline void add_certificate(Report& r, const GammaCertificate& c, const std::string& prefix = "") {
  r.field(prefix + "gamma", c.gamma.pretty());
  r.field(prefix + "gamma_raw", c.gamma.str());
  r.field(prefix + "pivot", c.pivot);
  r.field(prefix + "second_pivot", c.second_pivot ? *c.second_pivot : std::string("none"));
  r.field(prefix + "pivot_independent", c.pivot_independent);
  r.field(prefix + "battery_size", static_cast<int>(c.battery.size()));
  int passed = 0;
  std::vector<std::vector<std::string>> rows;
  for (const auto& e : c.battery) {
    passed += e.equal;
    rows.push_back({e.id, std::to_string(e.j), e.equal ? "pass" : "FAIL"});
  }
  r.field(prefix + "battery_passed", passed);
  for (std::size_t i = 0; i < c.components.size(); ++i) r.field(prefix + "component." + std::to_string(i), c.components[i]);
  r.table(prefix + "battery", {"member", "j", "equal"}, std::move(rows));
}

}  // namespace ellgamma
