#include "cevoi/service.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <condition_variable>
#include <ctime>
#include <deque>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <thread>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <json.hpp>

#include "cevoi/error.hpp"
#include "cevoi/extensions.hpp"
#include "cevoi/io.hpp"
#include "cevoi/render.hpp"
#include "cevoi/summary.hpp"
#include "cevoi/voi.hpp"

namespace cevoi::service {

using nlohmann::json;

namespace {

/// Request failure carrying its HTTP status.
struct HttpError : std::runtime_error {
  HttpError(int status, const std::string& message, std::string field = {})
      : std::runtime_error(message), status(status), field(std::move(field)) {}
  int status;
  std::string field;
};

std::string now_utc() {
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)));
}

Response json_response(int status, const json& body) {
  Response r;
  r.status = status;
  r.body = body.dump();
  return r;
}

Response error_response(int status, const std::string& message, const std::string& field = {}) {
  json body{{"error", message}};
  if (!field.empty()) body["field"] = field;
  return json_response(status, body);
}

std::string etag(std::uint64_t revision) { return fmt::format("\"{}\"", revision); }

json parse_body(const Request& req) {
  if (req.body.empty()) throw HttpError(400, "request body is empty");
  try {
    json doc = json::parse(req.body);
    if (!doc.is_object()) throw HttpError(400, "request body must be a JSON object");
    return doc;
  } catch (const json::parse_error& e) {
    throw HttpError(400, fmt::format("malformed JSON: {}", e.what()));
  }
}

void reject_unknown_keys(const json& doc, std::initializer_list<std::string_view> known) {
  for (const auto& [key, value] : doc.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ValidationError(fmt::format("unknown field '{}'", key), key);
    }
  }
}

std::optional<double> query_number(const Request& req, const std::string& name) {
  auto it = req.query.find(name);
  if (it == req.query.end() || it->second.empty()) return std::nullopt;
  const std::string& s = it->second;
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size() || !std::isfinite(v)) {
    throw ValidationError(fmt::format("'{}' must be a number, got '{}'", name, s), name);
  }
  return v;
}

double required_k(const Request& req) {
  auto k = query_number(req, "k");
  if (!k) throw ValidationError("query parameter 'k' is required", "k");
  return *k;
}

std::size_t one_based_index(const json& v, const char* field, std::size_t n) {
  if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<unsigned long long>() > n) {
    throw ValidationError(fmt::format("'{}' must be an integer in 1..{}", field, n), field);
  }
  return static_cast<std::size_t>(v.get<long long>() - 1);
}

json summary_to_json(const SummaryBlock& b) {
  json eu = json::array();
  for (std::size_t t = 0; t < b.arm_labels.size(); ++t) {
    eu.push_back({{"arm", b.arm_labels[t]}, {"value", b.expected_utility[t]}});
  }
  json cmp = json::array();
  for (const auto& c : b.comparisons) {
    cmp.push_back({{"label", c.label},
                   {"eib", c.eib},
                   {"ceac", c.ceac},
                   {"icer", c.icer ? json(*c.icer) : json(nullptr)}});
  }
  return json{{"reference", b.reference},   {"comparators", b.comparators},
              {"decision", b.decision},     {"requested_k", b.requested_k},
              {"k", b.k},                   {"snapped", b.snapped()},
              {"expected_utility", eu},     {"comparisons", cmp},
              {"optimal", b.optimal},       {"evpi", b.evpi},
              {"text", to_text(b)}};
}

json evppi_to_json(const EvppiResult& r) {
  json diag = json::array();
  for (const auto& d : r.diagnostics) {
    diag.push_back({{"k", d.k}, {"raw", d.raw}, {"smoothing", d.smoothing}, {"cv_error", d.cv_error}});
  }
  return json{{"params", r.params},     {"method", to_string(r.method)}, {"k", r.k},
              {"evppi", r.evppi},       {"evpi", r.evpi},                {"diagnostics", diag},
              {"warnings", r.warnings}};
}

/// Immutable session state; replaced wholesale by each mutation.
struct Snapshot {
  Analysis analysis;
  io::ExtensionState state;
  io::AttachedExtensions ext;
  std::shared_ptr<const ParameterInputs> inputs;
  std::vector<std::string> advisories;
  std::uint64_t revision = 1;
  std::string created;
  std::string updated;
  std::string digest;
};

std::shared_ptr<const Snapshot> make_snapshot(Analysis a, io::ExtensionState state,
                                              const Snapshot* previous) {
  io::AttachedExtensions ext = io::compute_extensions(a, state);
  std::string digest = io::content_hash(io::statistics_json(a, ext));
  auto snap = std::make_shared<Snapshot>(Snapshot{std::move(a), std::move(state), std::move(ext),
                                                  nullptr, {}, 1, now_utc(), {}, std::move(digest)});
  snap->updated = snap->created;
  if (previous) {
    snap->inputs = previous->inputs;
    snap->advisories = previous->advisories;
    snap->revision = previous->revision + 1;
    snap->created = previous->created;
  }
  return snap;
}

struct Session {
  std::string id;
  std::mutex writer;  // one mutation at a time
  mutable std::shared_mutex mu;
  std::shared_ptr<const Snapshot> snap;

  std::shared_ptr<const Snapshot> load() const {
    std::shared_lock lock(mu);
    return snap;
  }
  void store(std::shared_ptr<const Snapshot> next) {
    std::unique_lock lock(mu);
    snap = std::move(next);
  }
};

json describe(const Session& s, const Snapshot& snap) {
  const Analysis& a = snap.analysis;
  json params = nullptr;
  if (snap.inputs) {
    json dropped = json::array();
    for (const auto& d : snap.inputs->dropped) {
      dropped.push_back({{"name", d.name}, {"reason", to_string(d.reason)}, {"relation", d.relation}});
    }
    params = json{{"names", snap.inputs->names}, {"dropped", dropped}};
  }
  return json{{"id", s.id},
              {"revision", snap.revision},
              {"created", snap.created},
              {"updated", snap.updated},
              {"digest", snap.digest},
              {"dataset",
               {{"n_sim", a.n_sim()}, {"n_int", a.n_int()}, {"labels", a.dataset().labels}}},
              {"config", io::config_to_json(io::config_of(a))},
              {"kstar", a.kstar()},
              {"decision", decision_sentence(a)},
              {"extensions", io::extension_state_to_json(snap.state)},
              {"parameters", params},
              {"advisories", snap.advisories}};
}

enum class JobStatus { queued, running, done, failed };

std::string_view to_string(JobStatus s) {
  switch (s) {
    case JobStatus::queued:
      return "queued";
    case JobStatus::running:
      return "running";
    case JobStatus::done:
      return "done";
    case JobStatus::failed:
      return "failed";
  }
  return "unknown";
}

struct Job {
  std::string id;
  std::string session;
  std::shared_ptr<const Snapshot> snap;
  std::vector<std::string> params;
  EvppiOptions options;
  // guarded by Impl::jobs_mu
  JobStatus status = JobStatus::queued;
  json result;
  std::string error;
  std::string field;
};

}  // namespace

struct Service::Impl {
  ServiceOptions options;

  std::shared_mutex sessions_mu;
  std::map<std::string, std::shared_ptr<Session>> sessions;

  std::mutex jobs_mu;
  std::condition_variable jobs_cv;
  std::map<std::string, std::shared_ptr<Job>> jobs;
  std::deque<std::shared_ptr<Job>> queue;
  bool stopping = false;
  std::thread worker;

  std::mutex rng_mu;
  std::mt19937_64 rng{std::random_device{}()};

  explicit Impl(ServiceOptions o) : options(std::move(o)) {
    worker = std::thread([this] { run_jobs(); });
  }

  ~Impl() {
    {
      std::lock_guard lock(jobs_mu);
      stopping = true;
    }
    jobs_cv.notify_all();
    worker.join();
  }

  std::string new_id(char prefix) {
    std::lock_guard lock(rng_mu);
    return fmt::format("{}{:016x}", prefix, rng());
  }

  void run_jobs() {
    for (;;) {
      std::shared_ptr<Job> job;
      {
        std::unique_lock lock(jobs_mu);
        jobs_cv.wait(lock, [&] { return stopping || !queue.empty(); });
        if (stopping) return;
        job = queue.front();
        queue.pop_front();
        job->status = JobStatus::running;
      }
      json result;
      std::string error, field;
      try {
        result = evppi_to_json(evppi(job->snap->analysis, job->params, *job->snap->inputs, job->options));
      } catch (const ValidationError& e) {
        error = e.what();
        field = e.field();
      } catch (const std::exception& e) {
        error = e.what();
      }
      std::lock_guard lock(jobs_mu);
      job->status = error.empty() ? JobStatus::done : JobStatus::failed;
      job->result = std::move(result);
      job->error = std::move(error);
      job->field = std::move(field);
      job->snap.reset();
    }
  }

  std::shared_ptr<Session> find_session(const std::string& id) {
    std::shared_lock lock(sessions_mu);
    auto it = sessions.find(id);
    if (it == sessions.end()) throw HttpError(404, fmt::format("unknown session '{}'", id));
    return it->second;
  }

  static void check_if_match(const Request& req, std::uint64_t revision) {
    auto it = req.headers.find("if-match");
    if (it == req.headers.end()) return;
    std::string v = it->second;
    if (v == "*") return;
    if (v.rfind("W/", 0) == 0) v.erase(0, 2);
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') v = v.substr(1, v.size() - 2);
    std::uint64_t want = 0;
    auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), want);
    if (ec != std::errc{} || end != v.data() + v.size()) {
      throw HttpError(400, fmt::format("If-Match must be a revision number, got '{}'", it->second),
                      "If-Match");
    }
    if (want != revision) {
      throw HttpError(409, fmt::format("revision mismatch: session is at {}, request expects {}",
                                       revision, want),
                      "If-Match");
    }
  }

  template <class F>
  Response mutate(const std::string& id, const Request& req, F&& change) {
    auto session = find_session(id);
    std::lock_guard write(session->writer);
    auto current = session->load();
    check_if_match(req, current->revision);
    std::shared_ptr<const Snapshot> next = change(*current);  // throws leave the state untouched
    session->store(next);
    Response r = json_response(200, json{{"id", id},
                                         {"revision", next->revision},
                                         {"digest", next->digest},
                                         {"config", io::config_to_json(io::config_of(next->analysis))},
                                         {"kstar", next->analysis.kstar()},
                                         {"extensions", io::extension_state_to_json(next->state)}});
    r.headers.emplace_back("ETag", etag(next->revision));
    return r;
  }

  // --- handlers --------------------------------------------------------------

  Response create_session(const Request& req) {
    const json body = parse_body(req);
    reject_unknown_keys(body, {"dataset", "csv", "manifest", "base_dir", "config", "params", "extensions"});
    const int forms = static_cast<int>(body.contains("dataset")) + static_cast<int>(body.contains("csv")) +
                      static_cast<int>(body.contains("manifest"));
    if (forms != 1) {
      throw ValidationError("give exactly one of 'dataset', 'csv' or 'manifest'", "dataset");
    }

    std::optional<Analysis> analysis;
    std::optional<RawParameters> raw;
    std::vector<std::string> advisories;
    auto config = [&] {
      auto it = body.find("config");
      return it == body.end() || it->is_null() ? io::AnalysisConfig{} : io::config_from_json(*it);
    };

    if (auto it = body.find("manifest"); it != body.end()) {
      io::DatasetManifest m;
      try {
        if (it->is_string()) {
          m = io::load_manifest(it->get<std::string>());
        } else if (it->is_object()) {
          m = io::manifest_from_json(*it, body.value("base_dir", std::string{}));
        } else {
          throw ValidationError("'manifest' must be a path or an object", "manifest");
        }
        std::optional<std::vector<std::string>> labels;
        if (!m.labels.empty()) labels = m.labels;
        io::LoadedPsa psa = io::load_psa(m.effects_path, m.costs_path, labels);
        if (m.params_path) raw = io::load_params(*m.params_path);
        advisories = std::move(psa.advisories);
        analysis = io::build_analysis(std::move(psa.dataset), m.config);
      } catch (const IoError& e) {
        throw ValidationError(e.what(), "manifest");
      }
    } else if (auto it = body.find("csv"); it != body.end()) {
      const json& csv = *it;
      if (!csv.is_object() || !csv.contains("effects") || !csv.contains("costs") ||
          !csv["effects"].is_string() || !csv["costs"].is_string()) {
        throw ValidationError("'csv' needs 'effects' and 'costs' as CSV text", "csv");
      }
      std::optional<std::vector<std::string>> labels;
      if (csv.contains("labels")) labels = csv["labels"].get<std::vector<std::string>>();
      io::LoadedPsa psa = io::psa_from_csv_text(csv["effects"].get<std::string>(),
                                                csv["costs"].get<std::string>(), labels);
      if (auto p = csv.find("params"); p != csv.end() && p->is_string()) {
        raw = io::params_from_csv_text(p->get<std::string>());
      }
      advisories = std::move(psa.advisories);
      analysis = io::build_analysis(std::move(psa.dataset), config());
    } else {
      io::LoadedPsa psa = io::psa_from_json(body["dataset"]);
      advisories = std::move(psa.advisories);
      analysis = io::build_analysis(std::move(psa.dataset), config());
    }
    if (auto it = body.find("params"); it != body.end() && !it->is_null()) {
      raw = io::params_from_json(*it);
    }

    std::shared_ptr<const ParameterInputs> inputs;
    if (raw) {
      if (raw->mat.rows() != analysis->n_sim()) {
        throw ValidationError(fmt::format("parameters have {} rows but the PSA has {} simulations",
                                          raw->mat.rows(), analysis->n_sim()),
                              "params");
      }
      inputs = std::make_shared<const ParameterInputs>(create_inputs(*raw));
    }
    io::ExtensionState state;
    if (auto it = body.find("extensions"); it != body.end() && !it->is_null()) {
      state = io::extension_state_from_json(*it);
    }

    auto base = make_snapshot(std::move(*analysis), std::move(state), nullptr);
    auto snap = std::make_shared<Snapshot>(*base);
    snap->inputs = std::move(inputs);
    snap->advisories = std::move(advisories);

    auto session = std::make_shared<Session>();
    session->snap = snap;
    {
      std::unique_lock lock(sessions_mu);
      if (sessions.size() >= options.max_sessions) {
        throw HttpError(503, fmt::format("session limit of {} reached", options.max_sessions));
      }
      do {
        session->id = new_id('s');
      } while (sessions.count(session->id) != 0);
      sessions.emplace(session->id, session);
    }
    Response r = json_response(201, describe(*session, *snap));
    r.headers.emplace_back("Location", "/sessions/" + session->id);
    r.headers.emplace_back("ETag", etag(snap->revision));
    return r;
  }

  Response list_sessions() {
    json ids = json::array();
    std::shared_lock lock(sessions_mu);
    for (const auto& [id, s] : sessions) ids.push_back(id);
    return json_response(200, json{{"sessions", ids}});
  }

  Response get_session(const std::string& id) {
    auto session = find_session(id);
    auto snap = session->load();
    Response r = json_response(200, describe(*session, *snap));
    r.headers.emplace_back("ETag", etag(snap->revision));
    return r;
  }

  Response delete_session(const std::string& id) {
    std::unique_lock lock(sessions_mu);
    if (sessions.erase(id) == 0) throw HttpError(404, fmt::format("unknown session '{}'", id));
    Response r;
    r.status = 204;
    return r;
  }

  Response patch_session(const std::string& id, const Request& req) {
    const json body = parse_body(req);
    reject_unknown_keys(body, {"ref", "comparisons", "kmax"});
    if (body.empty()) throw ValidationError("nothing to change", "ref");
    return mutate(id, req, [&](const Snapshot& cur) {
      Analysis a = cur.analysis;
      const std::size_t n = a.n_int();
      std::optional<std::size_t> ref;
      if (body.contains("ref")) ref = one_based_index(body["ref"], "ref", n);

      if (body.contains("comparisons")) {
        std::optional<std::vector<std::size_t>> comps;
        if (!body["comparisons"].is_null()) {
          if (!body["comparisons"].is_array()) {
            throw ValidationError("'comparisons' must be an array or null", "comparisons");
          }
          comps.emplace();
          for (const auto& v : body["comparisons"]) comps->push_back(one_based_index(v, "comparisons", n));
        }
        const std::size_t new_ref = ref.value_or(a.ref());
        if (comps && std::find(comps->begin(), comps->end(), new_ref) != comps->end()) {
          throw ValidationError(
              fmt::format("reference {} is also listed as a comparison", new_ref + 1),
              ref ? "ref" : "comparisons");
        }
        a = new_analysis(a.dataset_ptr(), new_ref, std::move(comps), a.grid());
      } else if (ref) {
        a = set_reference(a, *ref);
      }
      if (body.contains("kmax")) {
        if (!body["kmax"].is_number()) throw ValidationError("'kmax' must be a number", "kmax");
        try {
          a = set_kmax(a, body["kmax"].get<double>());
        } catch (const ValidationError& e) {
          throw ValidationError(e.what(), "kmax");
        }
      }
      return make_snapshot(std::move(a), cur.state, &cur);
    });
  }

  Response get_extensions(const std::string& id) {
    auto snap = find_session(id)->load();
    Response r = json_response(200, json{{"id", id},
                                         {"revision", snap->revision},
                                         {"extensions", io::extension_state_to_json(snap->state)},
                                         {"digest", snap->digest}});
    r.headers.emplace_back("ETag", etag(snap->revision));
    return r;
  }

  Response post_extensions(const std::string& id, const Request& req) {
    const json body = parse_body(req);
    reject_unknown_keys(body, {"multice", "riskav", "shares"});
    if (body.empty()) throw ValidationError("give at least one of 'multice', 'riskav', 'shares'", "multice");
    const io::ExtensionState given = io::extension_state_from_json(body);
    return mutate(id, req, [&](const Snapshot& cur) {
      io::ExtensionState state = cur.state;
      if (body.contains("multice")) state.multi_ce = given.multi_ce;
      if (body.contains("riskav")) state.risk_aversion = given.risk_aversion;
      if (body.contains("shares")) state.shares = given.shares;
      return make_snapshot(cur.analysis, std::move(state), &cur);
    });
  }

  Response get_summary(const std::string& id, const Request& req) {
    auto snap = find_session(id)->load();
    json body = summary_to_json(summarize(snap->analysis, required_k(req)));
    body["revision"] = snap->revision;
    Response r = json_response(200, body);
    r.headers.emplace_back("ETag", etag(snap->revision));
    return r;
  }

  Response get_plots(const std::string& id, const std::string& kind_name, const Request& req) {
    auto snap = find_session(id)->load();
    const Analysis& a = snap->analysis;
    const auto kind = plot_kind_from_string(kind_name);
    if (!kind) throw HttpError(404, fmt::format("unknown plot kind '{}'", kind_name));

    PlotOptions opts;
    if (auto it = req.query.find("legend"); it != req.query.end()) {
      opts.legend = legend_position_from_string(it->second);
      if (!opts.legend) throw ValidationError(fmt::format("unknown legend position '{}'", it->second), "legend");
    }
    const bool uses_k = *kind == PlotKind::ceplane || *kind == PlotKind::ib_density ||
                        *kind == PlotKind::contour || *kind == PlotKind::contour2 ||
                        *kind == PlotKind::grid || *kind == PlotKind::info_rank;
    const double k = uses_k ? required_k(req) : query_number(req, "k").value_or(0.0);

    std::optional<std::size_t> comparison;
    if (auto c = query_number(req, "comparison")) {
      const double v = *c;
      if (v < 1 || v != std::floor(v) || v > static_cast<double>(a.n_int())) {
        throw ValidationError(fmt::format("comparison must be an arm index in 1..{}", a.n_int()), "comparison");
      }
      comparison = a.comparison_position(static_cast<std::size_t>(v) - 1);
      if (!comparison) {
        throw ValidationError(fmt::format("arm {} is not a configured comparison", v), "comparison");
      }
    }

    std::vector<NamedSpec> specs;
    if (*kind == PlotKind::info_rank) {
      if (!snap->inputs) throw ValidationError("session has no parameter samples", "params");
      specs.push_back({"info-rank", info_rank_spec(info_rank(a, *snap->inputs, k), opts)});
    } else {
      specs = build_plots(a, snap->ext, *kind, k, comparison, opts);
    }

    Response r;
    if (auto f = req.query.find("format"); f != req.query.end() && f->second == "svg") {
      const NamedSpec* chosen = &specs.front();
      if (auto n = req.query.find("name"); n != req.query.end()) {
        auto it = std::find_if(specs.begin(), specs.end(), [&](const NamedSpec& s) { return s.name == n->second; });
        if (it == specs.end()) throw ValidationError(fmt::format("no figure named '{}'", n->second), "name");
        chosen = &*it;
      }
      r.content_type = "image/svg+xml";
      r.body = render_svg(chosen->spec);
    } else if (f != req.query.end() && f->second != "json") {
      throw ValidationError(fmt::format("unknown format '{}'", f->second), "format");
    } else {
      json plots = json::array();
      for (const auto& s : specs) plots.push_back({{"name", s.name}, {"spec", to_json(s.spec)}});
      r = json_response(200, json{{"revision", snap->revision}, {"kind", kind_name}, {"k", k}, {"plots", plots}});
    }
    r.headers.emplace_back("ETag", etag(snap->revision));
    return r;
  }

  Response post_evppi(const std::string& id, const Request& req) {
    const json body = parse_body(req);
    reject_unknown_keys(body, {"params", "method", "k", "full_grid"});
    auto snap = find_session(id)->load();
    if (!snap->inputs) throw ValidationError("session has no parameter samples", "params");

    auto job = std::make_shared<Job>();
    job->session = id;
    job->snap = snap;
    const json& params = body.contains("params") ? body["params"] : json();
    if (!params.is_array() || params.empty()) {
      throw ValidationError("'params' must be a non-empty array of parameter names", "params");
    }
    for (const auto& p : params) {
      if (!p.is_string()) throw ValidationError("'params' must hold names", "params");
      const auto& names = snap->inputs->names;
      if (std::find(names.begin(), names.end(), p.get<std::string>()) == names.end()) {
        throw ValidationError(fmt::format("unknown parameter '{}'", p.get<std::string>()), "params");
      }
      job->params.push_back(p.get<std::string>());
    }
    if (auto it = body.find("method"); it != body.end() && !it->is_null()) {
      const std::string m = it->is_string() ? it->get<std::string>() : "";
      if (m == to_string(EvppiMethod::binning)) {
        job->options.method = EvppiMethod::binning;
      } else if (m == to_string(EvppiMethod::nearest_neighbour)) {
        job->options.method = EvppiMethod::nearest_neighbour;
      } else {
        throw ValidationError("'method' must be \"binning\" or \"nearest-neighbour\"", "method");
      }
    }
    if (auto it = body.find("k"); it != body.end() && !it->is_null()) {
      if (!it->is_array() || it->empty()) throw ValidationError("'k' must be a non-empty array", "k");
      std::vector<std::size_t> idx;
      for (const auto& v : *it) {
        if (!v.is_number()) throw ValidationError("'k' must hold numbers", "k");
        idx.push_back(snap_to_grid(snap->analysis, v.get<double>()));
      }
      std::sort(idx.begin(), idx.end());
      idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
      job->options.k_subset = std::move(idx);
    }
    if (auto it = body.find("full_grid"); it != body.end() && !it->is_null()) {
      if (!it->is_boolean()) throw ValidationError("'full_grid' must be a boolean", "full_grid");
      job->options.full_grid = it->get<bool>();
    }

    job->id = new_id('j');
    {
      std::lock_guard lock(jobs_mu);
      jobs.emplace(job->id, job);
      queue.push_back(job);
    }
    jobs_cv.notify_one();
    Response r = json_response(202, json{{"job", job->id}, {"status", "queued"}, {"revision", snap->revision}});
    r.headers.emplace_back("Location", "/jobs/" + job->id);
    return r;
  }

  Response get_job(const std::string& id) {
    std::lock_guard lock(jobs_mu);
    auto it = jobs.find(id);
    if (it == jobs.end()) throw HttpError(404, fmt::format("unknown job '{}'", id));
    const Job& j = *it->second;
    json body{{"id", j.id}, {"session", j.session}, {"status", to_string(j.status)}};
    if (j.status == JobStatus::done) body["result"] = j.result;
    if (j.status == JobStatus::failed) {
      body["error"] = j.error;
      if (!j.field.empty()) body["field"] = j.field;
    }
    return json_response(200, body);
  }

  Response route(const Request& req) {
    std::vector<std::string> seg;
    std::size_t pos = 0;
    while (pos <= req.path.size()) {
      const std::size_t next = std::min(req.path.find('/', pos), req.path.size());
      if (next > pos) seg.push_back(req.path.substr(pos, next - pos));
      pos = next + 1;
    }
    const std::string& m = req.method;
    auto not_allowed = [&](std::string allow) {
      Response r = error_response(405, fmt::format("{} not allowed on {}", m, req.path));
      r.headers.emplace_back("Allow", std::move(allow));
      return r;
    };

    if (seg.size() == 1 && seg[0] == "health") {
      return m == "GET" ? json_response(200, json{{"status", "ok"}}) : not_allowed("GET");
    }
    if (!seg.empty() && seg[0] == "sessions") {
      if (seg.size() == 1) {
        if (m == "POST") return create_session(req);
        if (m == "GET") return list_sessions();
        return not_allowed("GET, POST");
      }
      const std::string& id = seg[1];
      if (seg.size() == 2) {
        if (m == "GET") return get_session(id);
        if (m == "PATCH") return patch_session(id, req);
        if (m == "DELETE") return delete_session(id);
        return not_allowed("GET, PATCH, DELETE");
      }
      if (seg.size() == 3 && seg[2] == "summary") {
        return m == "GET" ? get_summary(id, req) : not_allowed("GET");
      }
      if (seg.size() == 3 && seg[2] == "extensions") {
        if (m == "POST") return post_extensions(id, req);
        if (m == "GET") return get_extensions(id);
        return not_allowed("GET, POST");
      }
      if (seg.size() == 3 && seg[2] == "evppi") {
        return m == "POST" ? post_evppi(id, req) : not_allowed("POST");
      }
      if (seg.size() == 4 && seg[2] == "plots") {
        return m == "GET" ? get_plots(id, seg[3], req) : not_allowed("GET");
      }
    }
    if (seg.size() == 2 && seg[0] == "jobs") {
      return m == "GET" ? get_job(seg[1]) : not_allowed("GET");
    }
    throw HttpError(404, fmt::format("no route for {}", req.path));
  }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Service::~Service() = default;

Response Service::handle(const Request& req) {
  Response r;
  if (req.method == "OPTIONS") {
    r.status = 204;
    r.body.clear();
  } else {
    try {
      r = impl_->route(req);
    } catch (const HttpError& e) {
      r = error_response(e.status, e.what(), e.field);
    } catch (const ValidationError& e) {
      r = error_response(422, e.what(), e.field());
    } catch (const json::exception& e) {
      r = error_response(422, fmt::format("invalid JSON value: {}", e.what()));
    } catch (const std::exception& e) {
      r = error_response(500, e.what());
    }
  }
  r.headers.emplace_back("Access-Control-Allow-Origin", impl_->options.cors_origin);
  r.headers.emplace_back("Access-Control-Allow-Methods", "GET, POST, PATCH, DELETE, OPTIONS");
  r.headers.emplace_back("Access-Control-Allow-Headers", "Content-Type, If-Match");
  r.headers.emplace_back("Access-Control-Expose-Headers", "ETag, Location");
  return r;
}

}  // namespace cevoi::service
