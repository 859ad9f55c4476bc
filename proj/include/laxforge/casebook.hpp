// Fixture corpus: transcribed constraint displays, generator representations,
// substitution patterns, and closed forms, loaded from human-reviewable JSON
// files. The transcription layer holds only literals (strings parsed by the
// formula grammar); nothing here is computed by the derivation engine, so
// fixture errors stay independent of engine bugs.
#pragma once

#include <laxforge/ewpipe.hpp>

#include <filesystem>
#include <fstream>

namespace laxforge {

struct Fixture {
  enum class Kind { scalar, matrix, subst, rep, note };

  std::string id;
  Kind kind = Kind::note;
  std::string group;
  std::string tag;     // optional monomial tag for constraint fixtures
  std::string source;  // descriptive locator
  std::string note;
  std::string printed_variant_of;  // nonempty: literal form of a display whose
                                   // adopted reading lives under that id
  std::string raw;                 // original formula text
  Expr e;
  MatExpr m;
  Subst subst;
  Representation rep;

  bool adopted() const { return printed_variant_of.empty(); }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["id"] = id;
    j["group"] = group;
    switch (kind) {
      case Kind::scalar:
        j["kind"] = "scalar";
        j["expr"] = e.to_json();
        break;
      case Kind::matrix:
        j["kind"] = "matrix";
        j["matrix"] = m.to_json();
        break;
      case Kind::subst: {
        j["kind"] = "subst";
        nlohmann::json map;
        for (auto& [k, v] : subst.fn_rules) map[k] = v.to_json();
        j["map"] = map;
        break;
      }
      case Kind::rep: {
        j["kind"] = "rep";
        nlohmann::json map;
        for (auto& [k, v] : rep) map[k] = v.to_json();
        j["matrices"] = map;
        break;
      }
      case Kind::note:
        j["kind"] = "note";
        break;
    }
    if (!tag.empty()) j["tag"] = tag;
    j["source"] = source;
    if (!note.empty()) j["note"] = note;
    if (!printed_variant_of.empty()) j["printed_variant_of"] = printed_variant_of;
    return j;
  }

  std::string to_latex() const {
    switch (kind) {
      case Kind::scalar:
        return id + ":\\quad " + e.to_latex() + " = 0";
      case Kind::matrix:
        return id + ":\\quad " + m.to_latex() + " = 0";
      case Kind::subst: {
        std::string s = id + ":\\quad ";
        bool first = true;
        for (auto& [k, v] : subst.fn_rules) {
          if (!first) s += ",\\; ";
          s += detail::latex_name(k) + " = " + v.to_latex();
          first = false;
        }
        return s;
      }
      case Kind::rep: {
        std::string s = id + ":\\quad ";
        bool first = true;
        for (auto& [k, v] : rep) {
          if (!first) s += ",\\; ";
          s += detail::latex_name(k) + " = " + v.to_latex();
          first = false;
        }
        return s;
      }
      case Kind::note:
        return id + ": " + note;
    }
    return id;
  }
};

struct CompareReport {
  struct Match {
    std::string fixture_id;
    std::string constraint;  // tag + entry note of the generated item
    GaussRat scale;          // generated = scale * fixture
  };
  std::vector<Match> matched;
  std::vector<std::string> missing;  // fixture ids with no counterpart
  std::vector<std::string> extra;    // generated constraints with no fixture

  bool all_matched() const { return missing.empty() && extra.empty(); }

  std::string summary() const {
    std::string s = std::to_string(matched.size()) + " matched";
    if (!missing.empty()) {
      s += "; missing:";
      for (auto& m : missing) s += " " + m;
    }
    if (!extra.empty()) {
      s += "; extra:";
      for (auto& e : extra) s += " " + e;
    }
    return s;
  }
  nlohmann::json to_json() const {
    nlohmann::json j;
    j["matched"] = nlohmann::json::array();
    for (auto& m : matched)
      j["matched"].push_back({{"fixture", m.fixture_id},
                              {"constraint", m.constraint},
                              {"scale", Expr::constant(m.scale).str()}});
    j["missing"] = missing;
    j["extra"] = extra;
    j["ok"] = all_matched();
    return j;
  }
};

class Casebook {
 public:
  static std::string default_dir() {
    if (const char* env = std::getenv("LAXFORGE_FIXTURES")) return env;
#ifdef LAXFORGE_SOURCE_DIR
    std::filesystem::path p = std::filesystem::path(LAXFORGE_SOURCE_DIR) / "fixtures";
    if (std::filesystem::exists(p)) return p.string();
#endif
    return "fixtures";
  }

  explicit Casebook(const std::string& dir = default_dir()) : dir_(dir) {
    env_ = ParseEnv::standard();
    env_.with_generic_matrices();
    if (!std::filesystem::exists(dir_))
      throw usage_error("fixture directory not found: " + dir_);
    for (auto& entry : std::filesystem::directory_iterator(dir_)) {
      if (entry.path().extension() != ".json") continue;
      load_file(entry.path().string());
    }
    if (fixtures_.empty()) throw usage_error("no fixtures found in " + dir_);
  }

  const Fixture& fixture(const std::string& id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw usage_error("unknown fixture id: " + id);
    return fixtures_[it->second];
  }
  bool has(const std::string& id) const { return index_.count(id) != 0; }

  const std::vector<Fixture>& all() const { return fixtures_; }
  const ParseEnv& env() const { return env_; }

  /// Adopted fixtures whose id starts with the given prefix.
  std::vector<const Fixture*> family(const std::string& prefix) const {
    std::vector<const Fixture*> out;
    for (auto& f : fixtures_)
      if (f.adopted() && f.id.rfind(prefix, 0) == 0) out.push_back(&f);
    return out;
  }
  std::vector<const Fixture*> group(const std::string& name) const {
    std::vector<const Fixture*> out;
    for (auto& f : fixtures_)
      if (f.group == name) out.push_back(&f);
    return out;
  }

  Representation representation(const std::string& name) const {
    const Fixture& f = fixture("rep." + name);
    if (f.kind != Fixture::Kind::rep) throw usage_error(f.id + " is not a representation");
    return f.rep;
  }

  /// Canonical-equality matching up to a nonzero constant multiple per
  /// constraint. A fixture may absorb several generated duplicates.
  static CompareReport compare(const ConstraintSet& gen,
                               const std::vector<const Fixture*>& fixtures) {
    CompareReport rep;
    std::set<std::string> hit;
    for (const auto& c : gen.items) {
      bool found = false;
      for (const auto* f : fixtures) {
        std::optional<GaussRat> lambda;
        if (c.scalar && f->kind == Fixture::Kind::scalar)
          lambda = Expr::proportional(c.expr, f->e);
        else if (!c.scalar && f->kind == Fixture::Kind::matrix)
          lambda = mat_proportional(c.matrix, f->m);
        if (lambda) {
          rep.matched.push_back({f->id, c.tag + (c.note.empty() ? "" : " " + c.note),
                                 *lambda});
          hit.insert(f->id);
          found = true;
          break;
        }
      }
      if (!found) rep.extra.push_back(c.tag + (c.note.empty() ? "" : " " + c.note));
    }
    for (const auto* f : fixtures)
      if (!hit.count(f->id)) rep.missing.push_back(f->id);
    return rep;
  }

 private:
  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw usage_error("cannot open fixture file " + path);
    nlohmann::json j;
    in >> j;
    std::string group = j.value("group", std::string());
    for (auto& fj : j.at("fixtures")) {
      Fixture f;
      f.id = fj.at("id");
      f.group = group;
      f.tag = fj.value("tag", std::string());
      f.source = fj.value("source", std::string());
      f.note = fj.value("note", std::string());
      f.printed_variant_of = fj.value("printed_variant_of", std::string());
      std::string kind = fj.value("kind", std::string("note"));
      if (kind == "scalar") {
        f.kind = Fixture::Kind::scalar;
        f.raw = fj.at("expr");
        f.e = parse_expr(f.raw, env_);
      } else if (kind == "matrix") {
        f.kind = Fixture::Kind::matrix;
        if (fj.contains("rows")) {
          auto& rows = fj.at("rows");
          int n = static_cast<int>(rows.size());
          MatExpr m(n);
          for (int i = 0; i < n; ++i)
            for (int jj = 0; jj < n; ++jj)
              m.at(i, jj) = parse_expr(rows[i][jj].get<std::string>(), env_);
          f.m = m;
        } else {
          f.raw = fj.at("expr");
          f.m = parse_mat(f.raw, env_);
        }
      } else if (kind == "subst") {
        f.kind = Fixture::Kind::subst;
        for (auto& [k, v] : fj.at("map").items())
          f.subst.fn_rules.emplace(k, parse_expr(v.get<std::string>(), env_));
      } else if (kind == "rep") {
        f.kind = Fixture::Kind::rep;
        for (auto& [k, v] : fj.at("matrices").items()) {
          int n = static_cast<int>(v.size());
          MatExpr m(n);
          for (int i = 0; i < n; ++i)
            for (int jj = 0; jj < n; ++jj)
              m.at(i, jj) = parse_expr(v[i][jj].get<std::string>(), env_);
          f.rep[k] = m;
        }
      } else if (kind == "note") {
        f.kind = Fixture::Kind::note;
      } else {
        throw usage_error("unknown fixture kind in " + path + ": " + kind);
      }
      if (index_.count(f.id)) throw usage_error("duplicate fixture id: " + f.id);
      index_[f.id] = fixtures_.size();
      fixtures_.push_back(std::move(f));
    }
  }

  std::string dir_;
  ParseEnv env_;
  std::vector<Fixture> fixtures_;
  std::map<std::string, size_t> index_;
};

}  // namespace laxforge
