#include "rswarm/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

namespace rswarm {

using nlohmann::json;
namespace fs = std::filesystem;

std::string fmt9(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", x);
  return buf;
}

namespace {

// Rounds to 9 significant digits so JSON output carries at most that many.
double round9(double x) { return std::isfinite(x) ? std::strtod(fmt9(x).c_str(), nullptr) : x; }

std::string pointer_key(const std::string& key) {
  std::string out;
  for (char c : key) {
    if (c == '~') out += "~0";
    else if (c == '/') out += "~1";
    else out += c;
  }
  return out;
}

// Typed access to a JSON tree that records every problem with its pointer.
class Reader {
 public:
  std::vector<FieldError> errors;

  void fail(const std::string& path, const std::string& message) { errors.push_back({path, message}); }

  bool object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) {
      fail(path.empty() ? "/" : path, "must be an object");
      return false;
    }
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
      if (!ok.count(key)) fail(path + "/" + pointer_key(key), "unknown key");
    }
    return true;
  }

  const json* field(const json& j, const char* key, const std::string& path, bool required) {
    const auto it = j.find(key);
    if (it == j.end()) {
      if (required) fail(path + "/" + key, "required field missing");
      return nullptr;
    }
    return &*it;
  }

  void number(const json& j, const char* key, const std::string& path, double& out, bool required = false) {
    if (const json* v = field(j, key, path, required)) {
      if (v->is_number()) out = v->get<double>();
      else fail(path + "/" + key, "must be a number");
    }
  }

  void integer(const json& j, const char* key, const std::string& path, int& out, bool required = false) {
    if (const json* v = field(j, key, path, required)) {
      if (v->is_number_integer()) out = v->get<int>();
      else fail(path + "/" + key, "must be an integer");
    }
  }

  void boolean(const json& j, const char* key, const std::string& path, bool& out) {
    if (const json* v = field(j, key, path, false)) {
      if (v->is_boolean()) out = v->get<bool>();
      else fail(path + "/" + key, "must be a boolean");
    }
  }

  void string(const json& j, const char* key, const std::string& path, std::string& out, bool required = false) {
    if (const json* v = field(j, key, path, required)) {
      if (v->is_string()) out = v->get<std::string>();
      else fail(path + "/" + key, "must be a string");
    }
  }

  bool vec2_value(const json& v, const std::string& path, Vec2& out) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      fail(path, "must be an array of two numbers");
      return false;
    }
    out = Vec2(v[0].get<double>(), v[1].get<double>());
    return true;
  }

  void vec2(const json& j, const char* key, const std::string& path, Vec2& out, bool required = false) {
    if (const json* v = field(j, key, path, required)) vec2_value(*v, path + "/" + key, out);
  }

  const json* array(const json& j, const char* key, const std::string& path, bool required = false) {
    const json* v = field(j, key, path, required);
    if (v && !v->is_array()) {
      fail(path + "/" + key, "must be an array");
      return nullptr;
    }
    return v;
  }

  bool vector_value(const json& v, const std::string& path, VecX& out) {
    if (!v.is_array()) {
      fail(path, "must be an array of numbers");
      return false;
    }
    out.resize(static_cast<Eigen::Index>(v.size()));
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (!v[k].is_number()) {
        fail(path + "/" + std::to_string(k), "must be a number");
        return false;
      }
      out(static_cast<Eigen::Index>(k)) = v[k].get<double>();
    }
    return true;
  }
};

void read_model(Reader& rd, const json& j, const std::string& path, DynamicsModel& model) {
  if (!rd.object(j, path, {"kind", "b", "m", "b_f", "b_g"})) return;
  std::string kind;
  rd.string(j, "kind", path, kind, true);
  if (!kind.empty()) {
    try {
      model.kind = model_kind_from_string(kind);
    } catch (const ContractViolation& e) {
      rd.fail(path + "/kind", e.what());
    }
  }
  rd.number(j, "b", path, model.b);
  rd.integer(j, "m", path, model.m);
  rd.number(j, "b_f", path, model.b_f);
  rd.number(j, "b_g", path, model.b_g);
}

void read_input(Reader& rd, const json& j, const std::string& path, InputPolytope& poly) {
  if (!rd.object(j, path, {"box", "lo", "hi", "A", "b"})) return;
  const bool has_box = j.contains("box"), has_range = j.contains("lo") || j.contains("hi"),
             has_rows = j.contains("A") || j.contains("b");
  if (int(has_box) + int(has_range) + int(has_rows) != 1) {
    rd.fail(path, "give exactly one of box, lo/hi or A/b");
    return;
  }
  if (has_box) {
    double half = 0.0;
    rd.number(j, "box", path, half, true);
    if (half > 0) poly = InputPolytope::box(half);
    else rd.fail(path + "/box", "must be > 0");
    return;
  }
  if (has_range) {
    VecX lo, hi;
    const json* l = rd.field(j, "lo", path, true);
    const json* h = rd.field(j, "hi", path, true);
    if (l && h && rd.vector_value(*l, path + "/lo", lo) && rd.vector_value(*h, path + "/hi", hi)) {
      if (lo.size() != hi.size() || lo.size() == 0) rd.fail(path + "/hi", "lo and hi must have the same positive length");
      else if ((lo.array() > hi.array()).any()) rd.fail(path + "/hi", "must be >= lo");
      else poly = InputPolytope::box(lo, hi);
    }
    return;
  }
  const json* A = rd.field(j, "A", path, true);
  const json* b = rd.field(j, "b", path, true);
  if (!A || !b) return;
  VecX bv;
  if (!rd.vector_value(*b, path + "/b", bv)) return;
  if (!A->is_array() || A->size() != static_cast<std::size_t>(bv.size()) || A->empty()) {
    rd.fail(path + "/A", "must be a non-empty array with one row per entry of b");
    return;
  }
  MatX Am;
  for (std::size_t r = 0; r < A->size(); ++r) {
    VecX row;
    if (!rd.vector_value((*A)[r], path + "/A/" + std::to_string(r), row)) return;
    if (r == 0) Am.resize(static_cast<Eigen::Index>(A->size()), row.size());
    if (row.size() != Am.cols()) {
      rd.fail(path + "/A/" + std::to_string(r), "rows must have equal length");
      return;
    }
    Am.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  poly.A = Am;
  poly.b = bv;
}

void read_agent(Reader& rd, const json& j, const std::string& path, AgentSpec& a) {
  if (!rd.object(j, path, {"id", "p0", "phi0", "model", "input", "tasks"})) return;
  rd.integer(j, "id", path, a.id, true);
  rd.vec2(j, "p0", path, a.p0, true);
  rd.number(j, "phi0", path, a.phi0);
  if (const json* m = rd.field(j, "model", path, true)) read_model(rd, *m, path + "/model", a.model);
  if (const json* in = rd.field(j, "input", path, true)) read_input(rd, *in, path + "/input", a.polytope);
  if (const json* tasks = rd.array(j, "tasks", path)) {
    for (std::size_t k = 0; k < tasks->size(); ++k) {
      const std::string tp = path + "/tasks/" + std::to_string(k);
      const json& t = (*tasks)[k];
      GoalTask task;
      if (rd.object(t, tp, {"region", "target", "t_start", "t_end"})) {
        rd.string(t, "region", tp, task.region, true);
        rd.vec2(t, "target", tp, task.target, true);
        rd.number(t, "t_start", tp, task.t_start, true);
        rd.number(t, "t_end", tp, task.t_end, true);
      }
      a.tasks.push_back(task);
    }
  }
}

void read_formation(Reader& rd, const json& j, const std::string& path, FormationSpec& f) {
  if (!rd.object(j, path, {"members", "offsets", "G_f", "goal_radius", "settle_time"})) return;
  if (const json* m = rd.array(j, "members", path, true)) {
    for (std::size_t k = 0; k < m->size(); ++k) {
      if ((*m)[k].is_number_integer()) f.members.push_back((*m)[k].get<int>());
      else rd.fail(path + "/members/" + std::to_string(k), "must be an integer");
    }
  }
  if (const json* o = rd.field(j, "offsets", path, true)) {
    if (!o->is_object()) {
      rd.fail(path + "/offsets", "must be an object keyed by agent id");
    } else {
      for (const auto& [key, value] : o->items()) {
        const std::string op = path + "/offsets/" + pointer_key(key);
        char* end = nullptr;
        const long id = std::strtol(key.c_str(), &end, 10);
        if (key.empty() || *end != '\0') {
          rd.fail(op, "key must be an agent id");
          continue;
        }
        Vec2 off;
        if (rd.vec2_value(value, op, off)) f.offsets[static_cast<AgentId>(id)] = off;
      }
    }
  }
  rd.vec2(j, "G_f", path, f.goal, true);
  rd.number(j, "goal_radius", path, f.goal_radius);
  rd.number(j, "settle_time", path, f.settle_time);
}

void read_adversary(Reader& rd, const json& j, const std::string& path, AdversarySpec& a) {
  if (!rd.object(j, path, {"id", "class", "t_start", "params"})) return;
  rd.integer(j, "id", path, a.id, true);
  std::string cls;
  rd.string(j, "class", path, cls, true);
  if (!cls.empty()) {
    try {
      a.cls = adversary_class_from_string(cls);
    } catch (const ContractViolation& e) {
      rd.fail(path + "/class", e.what());
    }
  }
  rd.number(j, "t_start", path, a.t_start, true);
  const json* p = rd.field(j, "params", path, true);
  if (!p) return;
  const std::string pp = path + "/params";
  if (a.cls == AdversaryClass::Chase) {
    if (rd.object(*p, pp, {"target"})) rd.integer(*p, "target", pp, a.target, true);
  } else if (rd.object(*p, pp, {"bias"})) {
    rd.vec2(*p, "bias", pp, a.bias, true);
  }
}

Scenario read_scenario(Reader& rd, const json& root) {
  Scenario sc;
  if (!rd.object(root, "", {"version", "name", "seed", "agents", "obstacles", "safety", "metrics", "weights", "sim",
                            "goals", "formation", "adversaries"})) {
    return sc;
  }
  rd.integer(root, "version", "", sc.version, true);
  rd.string(root, "name", "", sc.name);
  int seed = 0;
  rd.integer(root, "seed", "", seed);
  if (seed < 0) rd.fail("/seed", "must be >= 0");
  sc.seed = static_cast<unsigned>(std::max(seed, 0));

  if (const json* s = rd.field(root, "safety", "", true)) {
    if (rd.object(*s, "/safety", {"d", "R_s"})) {
      rd.number(*s, "d", "/safety", sc.safety.d, true);
      rd.number(*s, "R_s", "/safety", sc.safety.R_s, true);
    }
  }
  if (const json* m = rd.field(root, "metrics", "", false)) {
    if (rd.object(*m, "/metrics", {"n_c", "theta_w", "envelope", "tol_dev", "tol_goal"})) {
      rd.integer(*m, "n_c", "/metrics", sc.metrics.n_c);
      rd.number(*m, "theta_w", "/metrics", sc.metrics.theta_w);
      rd.number(*m, "tol_dev", "/metrics", sc.metrics.tol_dev);
      rd.number(*m, "tol_goal", "/metrics", sc.metrics.tol_goal);
      if (const json* e = rd.field(*m, "envelope", "/metrics", false)) {
        if (m->contains("theta_w")) rd.fail("/metrics/envelope", "give either theta_w or envelope");
        EnvelopeParams env;
        if (rd.object(*e, "/metrics/envelope", {"k1", "k2", "theta0"})) {
          rd.number(*e, "k1", "/metrics/envelope", env.k1, true);
          rd.number(*e, "k2", "/metrics/envelope", env.k2, true);
          rd.number(*e, "theta0", "/metrics/envelope", env.theta0, true);
        }
        sc.metrics.envelope = env;
      }
    }
  }
  if (const json* w = rd.field(root, "weights", "", false)) {
    if (rd.object(*w, "/weights", {"w_u", "w_slack", "w_pair", "q", "q_formation", "slack_max"})) {
      rd.number(*w, "w_u", "/weights", sc.weights.w_u);
      rd.number(*w, "w_slack", "/weights", sc.weights.w_slack);
      rd.number(*w, "w_pair", "/weights", sc.weights.w_pair);
      rd.number(*w, "q", "/weights", sc.weights.q);
      rd.number(*w, "q_formation", "/weights", sc.weights.q_formation);
      rd.number(*w, "slack_max", "/weights", sc.weights.slack_max);
    }
  }
  if (const json* s = rd.field(root, "sim", "", true)) {
    if (rd.object(*s, "/sim", {"dt", "t_end", "n", "max_horizon", "resilient", "detect"})) {
      rd.number(*s, "dt", "/sim", sc.sim.dt, true);
      rd.number(*s, "t_end", "/sim", sc.sim.t_end, true);
      rd.integer(*s, "n", "/sim", sc.sim.n);
      rd.number(*s, "max_horizon", "/sim", sc.sim.max_horizon);
      rd.boolean(*s, "resilient", "/sim", sc.sim.resilient);
      rd.boolean(*s, "detect", "/sim", sc.sim.detect);
    }
  }
  if (const json* goals = rd.array(root, "goals", "")) {
    for (std::size_t k = 0; k < goals->size(); ++k) {
      const std::string gp = "/goals/" + std::to_string(k);
      GoalRegion g;
      if (rd.object((*goals)[k], gp, {"name", "center", "radius"})) {
        rd.string((*goals)[k], "name", gp, g.name, true);
        rd.vec2((*goals)[k], "center", gp, g.center, true);
        rd.number((*goals)[k], "radius", gp, g.radius, true);
      }
      sc.goals.push_back(g);
    }
  }
  if (const json* obs = rd.array(root, "obstacles", "")) {
    for (std::size_t k = 0; k < obs->size(); ++k) {
      const std::string op = "/obstacles/" + std::to_string(k);
      Obstacle o;
      if (rd.object((*obs)[k], op, {"center", "radius"})) {
        rd.vec2((*obs)[k], "center", op, o.center, true);
        rd.number((*obs)[k], "radius", op, o.radius, true);
      }
      sc.obstacles.push_back(o);
    }
  }
  if (const json* agents = rd.array(root, "agents", "", true)) {
    for (std::size_t k = 0; k < agents->size(); ++k) {
      AgentSpec a;
      read_agent(rd, (*agents)[k], "/agents/" + std::to_string(k), a);
      sc.agents.push_back(a);
    }
  }
  if (const json* f = rd.field(root, "formation", "", false)) {
    FormationSpec spec;
    read_formation(rd, *f, "/formation", spec);
    sc.formation = spec;
  }
  if (const json* advs = rd.array(root, "adversaries", "")) {
    for (std::size_t k = 0; k < advs->size(); ++k) {
      AdversarySpec a;
      read_adversary(rd, (*advs)[k], "/adversaries/" + std::to_string(k), a);
      sc.adversaries.push_back(a);
    }
  }
  return sc;
}

std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t k = 0; k < std::min(byte == 0 ? 0 : byte - 1, text.size()); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

json vec_json(const Vec2& v) { return json::array({v.x(), v.y()}); }

json vecx_json(const VecX& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v(k));
  return out;
}

}  // namespace

Scenario parse_scenario_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto [line, col] = line_column(text, e.byte);
    std::string msg = e.what();
    if (const auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ValidationError({{"", "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg}});
  }
  Reader rd;
  Scenario sc = read_scenario(rd, root);
  const std::vector<FieldError> structural = rd.errors;
  const auto overlaps = [&](const std::string& path) {
    return std::any_of(structural.begin(), structural.end(), [&](const FieldError& f) {
      return path.rfind(f.path, 0) == 0 || f.path.rfind(path, 0) == 0;
    });
  };
  for (auto& e : validate(sc)) {
    // Field paths of the typed model use "polytope"; the file calls it "input".
    if (const auto pos = e.path.find("/polytope"); pos != std::string::npos) e.path.replace(pos, 9, "/input");
    if (!overlaps(e.path)) rd.errors.push_back(std::move(e));
  }
  if (!rd.errors.empty()) throw ValidationError(std::move(rd.errors));
  return sc;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Scenario parse_scenario(const fs::path& path) { return parse_scenario_text(read_file(path)); }

std::string serialize_scenario(const Scenario& sc) {
  json root;
  root["version"] = sc.version;
  root["name"] = sc.name;
  root["seed"] = sc.seed;
  root["safety"] = {{"d", sc.safety.d}, {"R_s", sc.safety.R_s}};
  json metrics = {{"n_c", sc.metrics.n_c}, {"tol_dev", sc.metrics.tol_dev}, {"tol_goal", sc.metrics.tol_goal}};
  if (sc.metrics.envelope) {
    const auto& e = *sc.metrics.envelope;
    metrics["envelope"] = {{"k1", e.k1}, {"k2", e.k2}, {"theta0", e.theta0}};
  } else {
    metrics["theta_w"] = sc.metrics.theta_w;
  }
  root["metrics"] = metrics;
  const auto& w = sc.weights;
  root["weights"] = {{"w_u", w.w_u},   {"w_slack", w.w_slack},         {"w_pair", w.w_pair},
                     {"q", w.q},       {"q_formation", w.q_formation}, {"slack_max", w.slack_max}};
  const auto& s = sc.sim;
  root["sim"] = {{"dt", s.dt},
                 {"t_end", s.t_end},
                 {"n", s.n},
                 {"max_horizon", s.max_horizon},
                 {"resilient", s.resilient},
                 {"detect", s.detect}};
  root["goals"] = json::array();
  for (const auto& g : sc.goals) {
    root["goals"].push_back({{"name", g.name}, {"center", vec_json(g.center)}, {"radius", g.radius}});
  }
  root["obstacles"] = json::array();
  for (const auto& o : sc.obstacles) {
    root["obstacles"].push_back({{"center", vec_json(o.center)}, {"radius", o.radius}});
  }
  root["agents"] = json::array();
  for (const auto& a : sc.agents) {
    json A = json::array();
    for (Eigen::Index r = 0; r < a.polytope.A.rows(); ++r) A.push_back(vecx_json(a.polytope.A.row(r).transpose()));
    json tasks = json::array();
    for (const auto& t : a.tasks) {
      tasks.push_back({{"region", t.region}, {"target", vec_json(t.target)}, {"t_start", t.t_start}, {"t_end", t.t_end}});
    }
    root["agents"].push_back({{"id", a.id},
                              {"p0", vec_json(a.p0)},
                              {"phi0", a.phi0},
                              {"model",
                               {{"kind", to_string(a.model.kind)},
                                {"b", a.model.b},
                                {"m", a.model.m},
                                {"b_f", a.model.b_f},
                                {"b_g", a.model.b_g}}},
                              {"input", {{"A", A}, {"b", vecx_json(a.polytope.b)}}},
                              {"tasks", tasks}});
  }
  if (sc.formation) {
    const auto& f = *sc.formation;
    json offsets = json::object();
    for (const auto& [id, off] : f.offsets) offsets[std::to_string(id)] = vec_json(off);
    root["formation"] = {{"members", f.members},
                         {"offsets", offsets},
                         {"G_f", vec_json(f.goal)},
                         {"goal_radius", f.goal_radius},
                         {"settle_time", f.settle_time}};
  }
  root["adversaries"] = json::array();
  for (const auto& a : sc.adversaries) {
    json params = a.cls == AdversaryClass::Chase ? json{{"target", a.target}} : json{{"bias", vec_json(a.bias)}};
    root["adversaries"].push_back({{"id", a.id}, {"class", to_string(a.cls)}, {"t_start", a.t_start}, {"params", params}});
  }
  return root.dump(2) + "\n";
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string trajectories_csv(const RunLog& log) {
  std::string out = "t,agent_id,x,y,phi,u1,u2\n";
  for (const auto& s : log.steps) {
    for (std::size_t i = 0; i < s.states.size(); ++i) {
      const auto& x = s.states[i];
      const VecX& u = s.controls[i];
      out += fmt9(s.t) + "," + std::to_string(x.id) + "," + fmt9(x.p.x()) + "," + fmt9(x.p.y()) + "," + fmt9(x.phi) +
             "," + fmt9(u.size() > 0 ? u(0) : 0.0) + "," + fmt9(u.size() > 1 ? u(1) : 0.0) + "\n";
    }
  }
  return out;
}

std::string metrics_csv(const RunLog& log) {
  std::string out = "t,agent_id,S_R,S_R_w,gamma_S,lambda,G_R,F_R_min,C_i\n";
  for (const auto& s : log.steps) {
    for (const auto& b : s.behavior) {
      out += fmt9(s.t) + "," + std::to_string(b.id) + "," + fmt9(b.S_R) + "," + fmt9(b.S_R_w) + "," + fmt9(b.gamma_S) +
             "," + fmt9(b.lambda) + "," + fmt9(b.G_R) + "," + fmt9(b.F_R_min) + "," + fmt9(b.C) + "\n";
    }
  }
  return out;
}

std::string events_jsonl(const RunLog& log) {
  std::vector<const Event*> order;
  for (const auto& e : log.events) order.push_back(&e);
  std::stable_sort(order.begin(), order.end(), [](const Event* a, const Event* b) { return a->t < b->t; });
  std::string out;
  for (const Event* e : order) {
    json payload = json::object();
    for (const auto& [key, value] : e->values) payload[key] = round9(value);
    if (!e->detail.empty()) payload["detail"] = e->detail;
    json line = {{"kind", e->kind}, {"t", round9(e->t)}, {"agents", e->agents}, {"payload", payload}};
    out += line.dump() + "\n";
  }
  return out;
}

std::string run_summary_json(const RunLog& log) {
  json verdicts = json::array();
  for (const auto& v : log.verdicts) {
    verdicts.push_back({{"suspect", v.suspect}, {"kind", to_string(v.kind)}, {"t_detect", round9(v.t_detect)}});
  }
  json root = {{"scenario", log.scenario},
               {"agents", log.ids},
               {"steps", log.steps.size()},
               {"solves", log.solves},
               {"failed_solves", log.failed_solves},
               {"max_kkt_residual", round9(log.max_kkt_residual)},
               {"verdicts", verdicts}};
  return root.dump(2) + "\n";
}

void write_bundle(const fs::path& dir, const Scenario& sc, const RunLog& log) {
  fs::create_directories(dir);
  write_atomic(dir / "scenario.json", serialize_scenario(sc));
  write_atomic(dir / "trajectories.csv", trajectories_csv(log));
  write_atomic(dir / "metrics.csv", metrics_csv(log));
  write_atomic(dir / "events.jsonl", events_jsonl(log));
  write_atomic(dir / "run.json", run_summary_json(log));
  write_atomic(dir / "plot.svg", render_plot(dir));
}

namespace {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw std::runtime_error("missing CSV column " + name);
    return static_cast<int>(it - header.begin());
  }
};

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  return out;
}

CsvTable read_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV " + path.string());
  table.header = split(line, ',');
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line, ',')) row.push_back(std::strtod(cell.c_str(), nullptr));
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<json> read_events(const fs::path& path) {
  std::vector<json> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"};

}  // namespace

std::string render_plot(const fs::path& dir) {
  const json sc = json::parse(read_file(dir / "scenario.json"));
  const CsvTable traj = read_csv(dir / "trajectories.csv");
  const auto events = read_events(dir / "events.jsonl");
  const int ct = traj.column("t"), cid = traj.column("agent_id"), cx = traj.column("x"), cy = traj.column("y");

  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  auto grow = [&](double x, double y, double r) {
    x0 = std::min(x0, x - r);
    x1 = std::max(x1, x + r);
    y0 = std::min(y0, y - r);
    y1 = std::max(y1, y + r);
  };
  for (const auto& r : traj.rows) grow(r[cx], r[cy], 0.0);
  for (const auto& o : sc["obstacles"]) grow(o["center"][0], o["center"][1], o["radius"]);
  for (const auto& g : sc["goals"]) grow(g["center"][0], g["center"][1], g["radius"]);
  if (sc.contains("formation")) grow(sc["formation"]["G_f"][0], sc["formation"]["G_f"][1], sc["formation"]["goal_radius"]);
  if (x0 > x1) x0 = -1, x1 = 1, y0 = -1, y1 = 1;
  const double pad = 0.05 * std::max({x1 - x0, y1 - y0, 1e-6});
  x0 -= pad, x1 += pad, y0 -= pad, y1 += pad;
  const double W = 800.0, H = std::clamp(W * (y1 - y0) / (x1 - x0), 200.0, 1600.0);
  const double sx = W / (x1 - x0), sy = H / (y1 - y0), sr = std::min(sx, sy);
  auto X = [&](double x) { return fmt9((x - x0) * sx); };
  auto Y = [&](double y) { return fmt9(H - (y - y0) * sy); };

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt9(W) + "\" height=\"" + fmt9(H + 24) +
                    "\" viewBox=\"0 0 " + fmt9(W) + " " + fmt9(H + 24) + "\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"8\" y=\"" + fmt9(H + 18) + "\" font-family=\"monospace\" font-size=\"12\">" +
         sc.value("name", std::string("run")) + "</text>\n";
  for (const auto& o : sc["obstacles"]) {
    svg += "<circle cx=\"" + X(o["center"][0]) + "\" cy=\"" + Y(o["center"][1]) + "\" r=\"" +
           fmt9(o["radius"].get<double>() * sr) + "\" fill=\"#999\" fill-opacity=\"0.5\"/>\n";
  }
  for (const auto& g : sc["goals"]) {
    svg += "<circle cx=\"" + X(g["center"][0]) + "\" cy=\"" + Y(g["center"][1]) + "\" r=\"" +
           fmt9(g["radius"].get<double>() * sr) + "\" fill=\"none\" stroke=\"#2a2\" stroke-dasharray=\"4 3\"/>\n";
    svg += "<text x=\"" + X(g["center"][0]) + "\" y=\"" + Y(g["center"][1]) +
           "\" font-family=\"monospace\" font-size=\"11\" fill=\"#2a2\">" + g["name"].get<std::string>() + "</text>\n";
  }
  if (sc.contains("formation")) {
    const auto& f = sc["formation"];
    svg += "<circle cx=\"" + X(f["G_f"][0]) + "\" cy=\"" + Y(f["G_f"][1]) + "\" r=\"" +
           fmt9(f["goal_radius"].get<double>() * sr) + "\" fill=\"none\" stroke=\"#2a2\" stroke-dasharray=\"4 3\"/>\n";
  }

  std::map<int, std::vector<std::pair<double, Vec2>>> paths;
  for (const auto& r : traj.rows) paths[static_cast<int>(r[cid])].push_back({r[ct], Vec2(r[cx], r[cy])});
  int colour = 0;
  std::map<int, std::string> agent_colour;
  for (const auto& [id, pts] : paths) {
    const std::string c = kPalette[colour++ % 8];
    agent_colour[id] = c;
    svg += "<polyline fill=\"none\" stroke=\"" + c + "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [t, p] : pts) svg += X(p.x()) + "," + Y(p.y()) + " ";
    svg += "\"/>\n";
    const Vec2 end = pts.back().second;
    svg += "<text x=\"" + X(end.x()) + "\" y=\"" + Y(end.y()) + "\" font-family=\"monospace\" font-size=\"12\" fill=\"" +
           c + "\">" + std::to_string(id) + "</text>\n";
  }
  auto position_at = [&](int id, double t) -> std::optional<Vec2> {
    const auto it = paths.find(id);
    if (it == paths.end()) return std::nullopt;
    for (const auto& [tt, p] : it->second) {
      if (tt >= t - 1e-9) return p;
    }
    return it->second.back().second;
  };
  for (const auto& e : events) {
    const std::string kind = e["kind"];
    if (kind != "detection" && kind != "safety_violation" && kind != "obstacle_violation") continue;
    const int id = e["agents"][0];
    const auto p = position_at(id, e["t"]);
    if (!p) continue;
    if (kind == "detection") {
      svg += "<rect x=\"" + fmt9((p->x() - x0) * sx - 5) + "\" y=\"" + fmt9(H - (p->y() - y0) * sy - 5) +
             "\" width=\"10\" height=\"10\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
    } else {
      svg += "<text x=\"" + X(p->x()) + "\" y=\"" + Y(p->y()) +
             "\" font-family=\"monospace\" font-size=\"16\" fill=\"red\" text-anchor=\"middle\">x</text>\n";
    }
  }
  svg += "</svg>\n";
  return svg;
}

std::string report(const fs::path& dir) {
  const auto events = read_events(dir / "events.jsonl");
  std::map<std::string, int> counts;
  std::string lines;
  for (const auto& e : events) {
    const std::string kind = e["kind"];
    ++counts[kind];
    if (kind != "detection" && kind != "safety_violation" && kind != "obstacle_violation" && kind != "goal_arrival") {
      continue;
    }
    std::string agents;
    for (const auto& a : e["agents"]) agents += (agents.empty() ? "" : ",") + std::to_string(a.get<int>());
    lines += "  t=" + fmt9(e["t"].get<double>()) + " " + kind + " agents=" + agents;
    if (e["payload"].contains("detail")) lines += " " + e["payload"]["detail"].get<std::string>();
    lines += "\n";
  }
  std::string out = "events:";
  for (const char* k : {"detection", "safety_violation", "obstacle_violation", "goal_arrival", "qp_infeasible"}) {
    out += std::string(" ") + k + "=" + std::to_string(counts[k]);
  }
  return out + "\n" + lines;
}

fs::path default_output_root() {
  const char* env = std::getenv("RESILIENT_SWARM_OUT");
  return (env && *env) ? fs::path(env) : fs::path("runs");
}

}  // namespace rswarm
