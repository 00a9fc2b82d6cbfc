#include "nq/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <unistd.h>

#include <json.hpp>

#include "nq/direction.hpp"
#include "nq/errors.hpp"
#include "nq/extremal.hpp"
#include "nq/fiber.hpp"
#include "nq/functional.hpp"
#include "nq/linear_anchor.hpp"
#include "nq/nehari.hpp"

namespace nq {
namespace {

using json = nlohmann::json;

json num(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}
json num(const ExtendedReal& v) { return num(v.value()); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

ExtremalOptions extremal_options(const RunConfig& c) {
    ExtremalOptions o;
    o.restarts = c.tolerances.restarts;
    o.seed = c.seed;
    o.max_iter = c.tolerances.max_iter;
    o.tol = c.tolerances.stationarity;
    o.converged_tol = c.tolerances.converged;
    o.infinity_threshold = c.tolerances.infinity;
    return o;
}

NehariOptions nehari_options(const RunConfig& c) {
    NehariOptions o;
    o.restarts = c.tolerances.restarts;
    o.seed = c.seed;
    o.max_iter = c.tolerances.max_iter;
    o.descent_tol = c.tolerances.descent;
    o.residual_tol = c.tolerances.residual;
    return o;
}

/// Artifacts of one run, written as they are produced.
class Artifacts {
public:
    explicit Artifacts(std::filesystem::path dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& content) {
        atomic_write(dir_ / name, content);
        json entry;
        entry["file"] = name;
        entry["bytes"] = content.size();
        entry["fnv1a"] = hex64(fnv1a(content));
        outputs_.push_back(entry);
    }
    const json& outputs() const { return outputs_; }
    const std::filesystem::path& dir() const { return dir_; }

private:
    std::filesystem::path dir_;
    json outputs_ = json::array();
};

std::string state_csv(const State& s) {
    std::ostringstream o;
    const GridDomain g = domain_of(s);
    const bool pair = is_pair(s);
    o << (pair ? "node,x,u,v\n" : "node,x,u\n");
    const auto x = flatten(s);
    const std::size_t n = static_cast<std::size_t>(g.n());
    for (std::size_t i = 0; i < n; ++i) {
        o << i << ',' << csv_number(g.node(static_cast<int>(i)))
          << ',' << csv_number(x[i]);
        if (pair) o << ',' << csv_number(x[n + i]);
        o << '\n';
    }
    return o.str();
}

State read_state_csv(const ProblemSpec& spec, const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) fail(ErrorKind::ConfigError, "solution csv is empty");
    const bool pair = line.rfind("node,x,u,v", 0) == 0;
    if (!pair && line.rfind("node,x,u", 0) != 0) fail(ErrorKind::ConfigError, "solution csv needs a node,x,u header");
    std::vector<double> u, v;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> cells;
        std::istringstream row(line);
        std::string cell;
        while (std::getline(row, cell, ',')) {
            try {
                std::size_t used = 0;
                cells.push_back(std::stod(cell, &used));
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                fail(ErrorKind::ConfigError, "solution csv: bad number '" + cell + "'");
            }
        }
        if (cells.size() != (pair ? 4u : 3u)) fail(ErrorKind::ConfigError, "solution csv: wrong column count");
        u.push_back(cells[2]);
        if (pair) v.push_back(cells[3]);
    }
    const State like = spec.zero_state();
    if (static_cast<int>(u.size()) != domain_of(like).n() || pair != is_pair(like))
        fail(ErrorKind::ConfigError, "solution csv does not match the spec's grid or arity");
    std::vector<double> flat = u;
    flat.insert(flat.end(), v.begin(), v.end());
    return unflatten(like, flat);
}

json verification_json(const Verification& v) {
    json j;
    j["membership_error"] = v.membership_error;
    j["membership_tol"] = v.membership_tol;
    j["membership_ok"] = v.membership_ok;
    j["residual_norm"] = v.residual_norm;
    j["residual_tol"] = v.residual_tol;
    j["residual_ok"] = v.residual_ok;
    j["second_derivative_sign"] = v.second_derivative_sign;
    j["branch_ok"] = v.branch_ok;
    if (v.det_j) j["det_j"] = *v.det_j;
    j["det_ok"] = v.det_ok;
    j["passed"] = v.passed();
    return j;
}

json solution_json(const ProblemSpec& spec, const NehariSolution& s, const RunConfig& c) {
    json j;
    j["lambda"] = s.lambda;
    j["branch"] = to_string(s.branch);
    j["phi"] = s.phi_value;
    j["el_residual_norm"] = s.el_residual_norm;
    j["fiber_r"] = s.fiber_r;
    j["fiber_second_derivative_sign"] = s.fiber_second_derivative_sign;
    j["ground_state"] = s.ground_state_flag;
    j["iterations"] = s.iterations;
    j["restarts"] = s.restarts_used;
    j["converged"] = s.converged;
    j["energy_norm"] = energy_norm(spec, s.state);
    const double residual_tol = spec.as<IndefiniteSystem>() ? std::max(c.tolerances.residual, 1e-6) : c.tolerances.residual;
    j["verification"] = verification_json(verify_solution(spec, s.lambda, s, residual_tol, c.tolerances.membership));
    return j;
}

json error_json(ErrorKind kind, const std::string& message) {
    return json{{"error", std::string(to_string(kind))}, {"message", message}};
}

bool benign(ErrorKind k) { return k == ErrorKind::BranchEmpty; }

void warn_near_extremal(double lambda, double star, std::ostream& err) {
    if (std::isfinite(star) && std::abs(lambda - star) <= 1e-6 * std::max(1.0, std::abs(star)))
        err << "warning: lambda is within 1e-6 of lambda*_max = " << csv_number(star)
            << "; the method is not applicable at the extremal value itself\n";
}

int cmd_fiber(const RunConfig& c, const ProblemSpec& spec, Artifacts& art, std::ostream& out) {
    const State u = to_state(spec, seeded_starts(spec, 1, c.seed).front());
    const TWindow w;
    const FiberProfile prof = fiber_scalar(spec, u, log_grid(w));
    std::ostringstream csv;
    csv << "t,r,dr\n";
    for (std::size_t i = 0; i < prof.t_samples.size(); ++i)
        csv << csv_number(prof.t_samples[i]) << ',' << csv_number(prof.r_values[i].value()) << ','
            << csv_number(prof.dr_values[i]) << '\n';
    art.write("fiber.csv", csv.str());

    const ScalarFiber fb = ScalarFiber::of(spec, u);
    const ShapeReport shape = classify_shape(spec, u, w);
    json j;
    j["critical_points"] = json::array();
    for (const auto& cp : prof.critical_points)
        j["critical_points"].push_back({{"t", cp.t}, {"r", cp.r}, {"kind", to_string(cp.kind)}});
    j["shape_class"] = to_string(prof.shape_class);
    j["sign_changes"] = shape.sign_changes;
    j["unique_global_max"] = shape.condition_a;
    j["single_critical_point_is_global"] = shape.condition_S;
    j["no_critical_point_or_constant"] = shape.condition_S0;
    j["limit_at_zero"] = num(fb.limit_at_zero());
    j["limit_at_infinity"] = num(fb.limit_at_infinity());
    j["big_lambda"] = num(big_lambda(spec, u));
    j["small_lambda"] = num(small_lambda(spec, u));
    j["direction"] = "seeded start 0 (positive sine bump)";
    j["t_window"] = {{"lo", w.lo}, {"hi", w.hi}, {"samples", w.samples}};
    art.write("criticals.json", dump(j));
    out << "fiber: shape " << to_string(prof.shape_class) << ", " << prof.critical_points.size()
        << " critical point(s), Lambda(u) = " << big_lambda(spec, u).to_string() << '\n';
    return 0;
}

int cmd_extremal(const RunConfig& c, const ProblemSpec& spec, Artifacts& art, std::ostream& out) {
    const ExtremalOptions o = extremal_options(c);
    const ExtremalReport r = extremal_report(spec, o);
    json j;
    j["model"] = spec.tag();
    j["lambda_min"] = num(r.lambda_min);
    j["lambda_star_min"] = num(r.lambda_star_min);
    j["lambda_star_max"] = num(r.lambda_star_max);
    j["lambda_max"] = num(r.lambda_max);
    j["lambda_partial_min"] = num(r.lambda_partial_min);
    if (r.scalar_lambda_star_max) j["scalar_lambda_star_max"] = num(*r.scalar_lambda_star_max);
    if (r.vector_lambda_star_max) j["vector_lambda_star_max"] = num(*r.vector_lambda_star_max);
    std::optional<OptimizedValue> constrained;
    if (spec.as<IndefiniteScalar>()) {
        constrained = ouyang_constrained(spec, o);
        j["lambda_star_max_constrained"] = num(constrained->value);
    }
    j["provenance"] = r.provenance;
    j["restarts_used"] = r.restarts_used;
    j["converged"] = r.converged;
    json hist = json::array();
    for (double h : r.best_history) hist.push_back(num(h));
    j["best_history"] = hist;
    j["tolerances"] = c.tolerances.as_map();
    art.write("report.json", dump(j));

    auto row = [&](const std::string& name, const ExtendedReal& v, const std::string& prov) {
        out << std::left << std::setw(28) << name << std::setw(26) << v.to_string() << prov << '\n';
    };
    out << std::left << std::setw(28) << "quantity" << std::setw(26) << "value" << "provenance" << '\n';
    auto prov = [&](const std::string& k) { return r.provenance.count(k) ? r.provenance.at(k) : std::string(); };
    row("lambda_min", r.lambda_min, prov("lambda_min"));
    row("lambda_star_min", r.lambda_star_min, prov("lambda_star_min"));
    row("lambda_star_max", r.lambda_star_max, prov("lambda_star_max"));
    row("lambda_max", r.lambda_max, prov("lambda_max"));
    row("lambda_partial_min", r.lambda_partial_min, prov("lambda_partial_min"));
    if (r.scalar_lambda_star_max) row("scalar_lambda_star_max", *r.scalar_lambda_star_max, prov("scalar_lambda_star_max"));
    if (r.vector_lambda_star_max) row("vector_lambda_star_max", *r.vector_lambda_star_max, prov("vector_lambda_star_max"));
    if (constrained) row("lambda_star_max_constrained", constrained->value, constrained->provenance);
    out << "tolerances: stationarity " << csv_number(c.tolerances.stationarity) << ", restarts "
        << c.tolerances.restarts << ", infinity above " << csv_number(c.tolerances.infinity) << '\n';
    return 0;
}

double star_for(const ProblemSpec& spec, const RunConfig& c) {
    return lambda_star_max_value(spec, extremal_options(c)).value.value();
}

int cmd_solve(const RunConfig& c, const ProblemSpec& spec, Artifacts& art, std::ostream& out, std::ostream& err) {
    if (!c.lambda) fail(ErrorKind::ConfigError, "solve needs --lambda");
    const double lam = *c.lambda;
    const double star = star_for(spec, c);
    warn_near_extremal(lam, star, err);
    json j;
    j["lambda"] = lam;
    j["lambda_star_max"] = num(star);
    j["tolerances"] = c.tolerances.as_map();
    int status = 0;
    if (spec.as<IndefiniteSystem>()) {
        try {
            const NehariSolution s = system_nehari_minimize(spec, lam, nehari_options(c));
            art.write("solution.csv", state_csv(s.state));
            j["solution"] = solution_json(spec, s, c);
            out << "solve: phi = " << csv_number(s.phi_value) << ", residual " << csv_number(s.el_residual_norm) << '\n';
        } catch (const Error& e) {
            j["solution"] = error_json(e.kind(), e.what());
            status = 1;
        }
        art.write("solve.json", dump(j));
        return status;
    }
    NehariOptions o = nehari_options(c);
    o.lambda_star_max = star;
    const SolutionPair pr = solve_pair(spec, lam, o);
    json branches;
    for (const auto* slot : {&pr.first, &pr.second}) {
        const std::string tag = slot == &pr.first ? "N1" : "N2";
        if (slot->solution) {
            art.write("solution_" + tag + ".csv", state_csv(slot->solution->state));
            branches[tag] = solution_json(spec, *slot->solution, c);
            out << "solve: " << tag << " phi = " << csv_number(slot->solution->phi_value) << ", residual "
                << csv_number(slot->solution->el_residual_norm) << '\n';
        } else {
            branches[tag] = error_json(*slot->error, slot->message);
            out << "solve: " << tag << " " << slot->message << '\n';
            if (!benign(*slot->error)) status = 1;
        }
    }
    if (!pr.first.solution && !pr.second.solution) status = 1;
    j["branches"] = branches;
    if (pr.separation) j["separation"] = *pr.separation;
    art.write("solve.json", dump(j));
    return status;
}

int cmd_sweep(const RunConfig& c, const ProblemSpec& spec, Artifacts& art, std::ostream& out, std::ostream& err) {
    std::vector<double> lams = c.lambdas;
    if (lams.empty() && c.lambda) lams.push_back(*c.lambda);
    if (lams.empty()) fail(ErrorKind::ConfigError, "sweep needs --lambdas FILE or --lambda X");
    const double star = star_for(spec, c);
    NehariOptions o = nehari_options(c);
    o.lambda_star_max = star;
    std::ostringstream csv;
    csv << "lambda,phi1,phi2,residual1,residual2,status1,status2\n";
    int solved = 0;
    for (double lam : lams) {
        warn_near_extremal(lam, star, err);
        std::optional<NehariSolution> s1, s2;
        std::string st1 = "ok", st2 = "ok";
        if (spec.as<IndefiniteSystem>()) {
            try {
                s1 = system_nehari_minimize(spec, lam, o);
            } catch (const Error& e) {
                st1 = std::string(to_string(e.kind()));
            }
            st2 = "n/a";
        } else {
            const SolutionPair pr = solve_pair(spec, lam, o);
            s1 = pr.first.solution;
            s2 = pr.second.solution;
            if (pr.first.error) st1 = std::string(to_string(*pr.first.error));
            if (pr.second.error) st2 = std::string(to_string(*pr.second.error));
        }
        solved += (s1 ? 1 : 0) + (s2 ? 1 : 0);
        auto cell = [](const std::optional<NehariSolution>& s, bool phi) {
            return s ? csv_number(phi ? s->phi_value : s->el_residual_norm) : std::string();
        };
        csv << csv_number(lam) << ',' << cell(s1, true) << ',' << cell(s2, true) << ',' << cell(s1, false) << ','
            << cell(s2, false) << ',' << st1 << ',' << st2 << '\n';
    }
    art.write("table.csv", csv.str());
    json j;
    j["lambdas"] = lams;
    j["lambda_star_max"] = num(star);
    j["solved"] = solved;
    j["tolerances"] = c.tolerances.as_map();
    art.write("sweep.json", dump(j));
    out << "sweep: " << lams.size() << " lambda value(s), " << solved << " solution(s)\n";
    return solved > 0 ? 0 : 1;
}

int cmd_anchor(const RunConfig& c, const ProblemSpec& spec, Artifacts& art, std::ostream& out) {
    const auto* m = spec.as<LinearMatrix>();
    if (!m) fail(ErrorKind::ConfigError, "anchor needs a linear_matrix spec");
    const auto ev = eig_oracle(m->A);
    ExtremalOptions o = anchor_options();
    o.seed = c.seed;
    o.tol = c.tolerances.stationarity;
    o.max_iter = c.tolerances.max_iter;
    const auto [lo, hi] = nmm_extreme_values(m->A, o);
    std::ostringstream csv;
    csv << "quantity,oracle,nmm,abs_diff\n";
    csv << "lambda_min," << csv_number(ev.front()) << ',' << csv_number(lo) << ',' << csv_number(std::abs(lo - ev.front()))
        << '\n';
    csv << "lambda_max," << csv_number(ev.back()) << ',' << csv_number(hi) << ',' << csv_number(std::abs(hi - ev.back()))
        << '\n';
    art.write("anchor.csv", csv.str());
    json j;
    j["eigenvalues"] = ev;
    j["nmm_min"] = lo;
    j["nmm_max"] = hi;
    j["max_abs_diff"] = std::max(std::abs(lo - ev.front()), std::abs(hi - ev.back()));
    j["agree_1e-8"] = std::abs(lo - ev.front()) < 1e-8 && std::abs(hi - ev.back()) < 1e-8;
    art.write("anchor.json", dump(j));
    out << csv.str();
    return j["agree_1e-8"].get<bool>() ? 0 : 1;
}

int cmd_verify(const RunConfig& c, const ProblemSpec& spec, Artifacts& art, std::ostream& out) {
    if (!c.lambda) fail(ErrorKind::ConfigError, "verify needs --lambda");
    if (!c.solution_path) fail(ErrorKind::ConfigError, "verify needs --solution FILE");
    NehariSolution s{read_state_csv(spec, read_text_file(*c.solution_path))};
    s.lambda = *c.lambda;
    s.branch = ScalarFiber::of(spec, s.state).d2phi(s.lambda, 1.0) < 0 ? BranchTag::N1 : BranchTag::N2;
    const Verification v = verify_solution(spec, s.lambda, s, c.tolerances.residual, c.tolerances.membership);
    json j = verification_json(v);
    j["lambda"] = s.lambda;
    j["branch"] = to_string(s.branch);
    j["phi"] = phi(spec, s.lambda, s.state);
    art.write("verify.json", dump(j));
    out << "verify: " << (v.passed() ? "pass" : "FAIL") << " (membership " << csv_number(v.membership_error)
        << ", residual " << csv_number(v.residual_norm) << ")\n";
    return v.passed() ? 0 : 1;
}

bool config_kind(ErrorKind k) {
    return k == ErrorKind::ConfigError || k == ErrorKind::InvalidSpec || k == ErrorKind::InvalidDomain ||
           k == ErrorKind::ArityMismatch;
}

}  // namespace

std::string csv_number(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::uint64_t fnv1a(std::string_view data) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = path.parent_path() / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
    {
        std::ofstream o(tmp, std::ios::binary | std::ios::trunc);
        if (!o) fail(ErrorKind::ConfigError, "cannot write " + tmp.string());
        o << content;
        o.flush();
        if (!o) fail(ErrorKind::ConfigError, "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        fail(ErrorKind::ConfigError, "cannot move output into place: " + path.string());
    }
}

std::string config_hash(const RunConfig& c, const std::string& spec_text) {
    std::ostringstream s;
    s << "command=" << to_string(c.command) << '\n' << "spec=" << spec_text << '\n';
    s << "lambda=" << (c.lambda ? csv_number(*c.lambda) : "none") << '\n' << "lambdas=";
    for (double l : c.lambdas) s << csv_number(l) << ',';
    s << "\nseed=" << c.seed << '\n';
    for (const auto& [k, v] : c.tolerances.as_map()) s << k << '=' << csv_number(v) << '\n';
    if (c.solution_path) s << "solution=" << read_text_file(*c.solution_path) << '\n';
    return hex64(fnv1a(s.str()));
}

int run(const RunConfig& c, std::ostream& out, std::ostream& err) {
    std::string spec_text;
    std::optional<ProblemSpec> spec;
    try {
        spec_text = read_text_file(c.spec_path);
        spec = parse_spec(spec_text, c.spec_path.parent_path());
        std::filesystem::create_directories(c.output_dir);
    } catch (const Error& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    }

    Artifacts art(c.output_dir);
    json manifest;
    manifest["command"] = to_string(c.command);
    manifest["spec"] = c.spec_path.filename().string();
    manifest["model"] = spec->tag();
    manifest["seed"] = c.seed;
    manifest["tolerances"] = c.tolerances.as_map();
    if (c.lambda) manifest["lambda"] = *c.lambda;
    if (!c.lambdas.empty()) manifest["lambdas"] = c.lambdas;

    int status = 0;
    try {
        manifest["config_hash"] = config_hash(c, spec_text);
        switch (c.command) {
            case Command::Fiber: status = cmd_fiber(c, *spec, art, out); break;
            case Command::Extremal: status = cmd_extremal(c, *spec, art, out); break;
            case Command::Solve: status = cmd_solve(c, *spec, art, out, err); break;
            case Command::Sweep: status = cmd_sweep(c, *spec, art, out, err); break;
            case Command::Anchor: status = cmd_anchor(c, *spec, art, out); break;
            case Command::Verify: status = cmd_verify(c, *spec, art, out); break;
        }
    } catch (const Error& e) {
        status = config_kind(e.kind()) ? 2 : 1;
        err << (status == 2 ? "config error: " : "solve error: ") << e.what() << '\n';
        manifest["error"] = error_json(e.kind(), e.what());
    }
    manifest["status"] = status;
    manifest["outputs"] = art.outputs();
    try {
        atomic_write(c.output_dir / "manifest.json", dump(manifest));
    } catch (const Error& e) {
        err << "config error: " << e.what() << '\n';
        return 2;
    }
    return status;
}

}  // namespace nq
