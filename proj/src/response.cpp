#include "specforge/response.hpp"

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "specforge/errors.hpp"
#include "specforge/kernels.hpp"

namespace specforge::response {

using algebra::CMatrix;
using diagrams::Diagram;
using diagrams::Dir;
using diagrams::Interaction;
using diagrams::Side;
using dynamics::Propagator;

QuantumSystem::QuantumSystem(dynamics::LindbladModel m, algebra::Operator dipole,
                             algebra::Operator dipole_plus,
                             algebra::Operator dipole_minus,
                             algebra::DensityMatrix rho0,
                             std::optional<algebra::EigenbasisTransform> eigenbasis)
    : model(std::move(m)),
      mu(std::move(dipole)),
      mu_plus(std::move(dipole_plus)),
      mu_minus(std::move(dipole_minus)),
      rho_init(std::move(rho0)),
      basis(std::move(eigenbasis)) {
    const auto& space = model.h.space;
    for (const algebra::Operator* op : {&mu, &mu_plus, &mu_minus})
        if (!(op->space == space))
            throw DimensionError("quantum system: operator space " +
                                 op->space.str() + " does not match model " +
                                 space.str());
    if (!(rho_init.space == space))
        throw DimensionError("quantum system: rho_init space mismatch");
}

namespace {

std::size_t steps_for(double delay_fs, std::size_t r) {
    return static_cast<std::size_t>(
        std::llround(delay_fs * static_cast<double>(r)));
}

// Branch projection per diagram rules.
void apply_interaction(const QuantumSystem& sys, const Interaction& ix,
                       CMatrix& state, CMatrix& scratch) {
    const auto& k = kernels::active();
    const std::size_t n = state.dim();
    const CMatrix* op = nullptr;
    bool left = ix.side == Side::ket;
    if (ix.side == Side::ket)
        op = (ix.dir == Dir::up) ? &sys.mu_plus.mat : &sys.mu_minus.mat;
    else
        op = (ix.dir == Dir::up) ? &sys.mu_minus.mat : &sys.mu_plus.mat;
    if (left)
        k.gemm(scratch.data(), op->data(), state.data(), n, cplx(1.0), cplx(0.0));
    else
        k.gemm(scratch.data(), state.data(), op->data(), n, cplx(1.0), cplx(0.0));
    std::swap(state, scratch);
}

// Folds a state-side projection into the detection operator:
// Tr(D * (A rho)) = Tr((D A) rho), Tr(D * (rho B)) = Tr((B D) rho).
void fold_interaction(const QuantumSystem& sys, const Interaction& ix,
                      CMatrix& det, CMatrix& scratch) {
    const auto& k = kernels::active();
    const std::size_t n = det.dim();
    const CMatrix* op = nullptr;
    if (ix.side == Side::ket)
        op = (ix.dir == Dir::up) ? &sys.mu_plus.mat : &sys.mu_minus.mat;
    else
        op = (ix.dir == Dir::up) ? &sys.mu_minus.mat : &sys.mu_plus.mat;
    if (ix.side == Side::ket)
        k.gemm(scratch.data(), det.data(), op->data(), n, cplx(1.0), cplx(0.0));
    else
        k.gemm(scratch.data(), op->data(), det.data(), n, cplx(1.0), cplx(0.0));
    std::swap(det, scratch);
}

CMatrix detection_operator(const QuantumSystem& sys, const Diagram& d,
                           const RunOptions& opts, std::string* desc = nullptr) {
    if (d.detection == diagrams::Detection::population) {
        const std::size_t n = opts.pl_element.value_or(d.final_excitation);
        if (n >= sys.dim())
            throw ValidationError("PL detection element " + std::to_string(n) +
                                  " outside dimension " +
                                  std::to_string(sys.dim()));
        CMatrix e(sys.dim());
        e.at(n, n) = cplx(1.0);
        if (desc) *desc = "population:" + std::to_string(n);
        return e;
    }
    if (opts.detect == DetectionOperator::mu_full) {
        if (desc) *desc = "polarization(mu)";
        return sys.mu.mat;
    }
    if (desc) *desc = "polarization(mu_minus)";
    return sys.mu_minus.mat;
}

void check_finite(const CMatrix& m, const std::string& where) {
    if (algebra::has_non_finite(m))
        throw DivergenceError("non-finite branch state during " + where);
}

std::size_t resolve_jobs(const RunOptions& opts) {
    if (!opts.parallel) return 1;
    if (opts.jobs > 0) return opts.jobs;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? hc : 1;
}

// Static row partition: deterministic regardless of scheduling.
void run_rows(std::size_t n_rows, std::size_t jobs,
              const std::function<void(std::size_t)>& body) {
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n_rows; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mu;
    for (std::size_t w = 0; w < jobs; ++w)
        pool.emplace_back([&] {
            try {
                while (true) {
                    const std::size_t i = next.fetch_add(1);
                    if (i >= n_rows) break;
                    body(i);
                }
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
            }
        });
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace

ExecuteResult execute(const QuantumSystem& sys, const DiagramRun& run,
                      bool record, const RunOptions& opts) {
    const Diagram& d = run.diagram;
    if (run.delays_fs.size() != d.interactions.size())
        throw ValidationError("execute: " + std::to_string(run.delays_fs.size()) +
                              " delays for " +
                              std::to_string(d.interactions.size()) +
                              " interactions");
    for (double t : run.delays_fs)
        if (t < 0.0) throw ValidationError("execute: negative delay");
    if (run.r < 1) throw ValidationError("execute: resolution must be >= 1");

    ExecuteResult result;
    if (d.empty()) {
        // zeroth order: no projections, detect the static polarization
        result.final_state = sys.rho_init.mat;
        result.value = algebra::trace_mul(sys.mu.mat, sys.rho_init.mat);
        if (record) {
            result.times_fs.push_back(0.0);
            result.states.push_back(result.final_state);
        }
        return result;
    }

    Propagator prop(sys.model);
    auto ws = prop.make_workspace();
    const double h = 1.0 / static_cast<double>(run.r);

    CMatrix state = sys.rho_init.mat;
    CMatrix scratch(state.dim());
    double t = 0.0;
    for (std::size_t i = 0; i < d.interactions.size(); ++i) {
        apply_interaction(sys, d.interactions[i], state, scratch);
        if (record) {
            result.times_fs.push_back(t);
            result.states.push_back(state);
        }
        const std::size_t steps = steps_for(run.delays_fs[i], run.r);
        for (std::size_t s = 0; s < steps; ++s) {
            prop.step(state, h, ws);
            t += h;
            if (record) {
                result.times_fs.push_back(t);
                result.states.push_back(state);
            }
        }
        check_finite(state, "interval after interaction " + std::to_string(i));
    }

    const CMatrix det = detection_operator(sys, d, opts);
    result.value = static_cast<double>(d.sign) * algebra::trace_mul(det, state);
    result.final_state = std::move(state);
    return result;
}

std::vector<ExecuteResult> diagram_donkey(
    const QuantumSystem& sys, const std::vector<double>& interaction_times_fs,
    const std::vector<Diagram>& diagram_list, std::size_t r) {
    std::vector<ExecuteResult> out;
    if (diagram_list.empty()) return out;
    if (interaction_times_fs.size() < 2)
        throw ValidationError("diagram_donkey: need at least one pulse time "
                              "plus the observation end");
    if (!std::is_sorted(interaction_times_fs.begin(), interaction_times_fs.end()))
        throw ValidationError("diagram_donkey: times must be nondecreasing");
    for (const Diagram& d : diagram_list) {
        if (interaction_times_fs.size() != d.interactions.size() + 1)
            throw ValidationError(
                "diagram_donkey: expected " +
                std::to_string(d.interactions.size() + 1) + " times for " +
                diagrams::to_dsl(d));
        DiagramRun run;
        run.diagram = d;
        run.r = r;
        for (std::size_t i = 0; i + 1 < interaction_times_fs.size(); ++i)
            run.delays_fs.push_back(interaction_times_fs[i + 1] -
                                    interaction_times_fs[i]);
        out.push_back(execute(sys, run, /*record=*/true));
    }
    return out;
}

namespace {

struct ScanPlan {
    std::size_t s1, s2;  // ascending scanned delay indices
    bool swapped;        // caller listed them descending
};

ScanPlan make_plan(const std::pair<std::size_t, std::size_t>& scan_id,
                   std::size_t n_delays) {
    if (scan_id.first == scan_id.second)
        throw ValidationError("coherence2d: scan indices must differ");
    if (scan_id.first >= n_delays || scan_id.second >= n_delays)
        throw ValidationError("coherence2d: scan index out of range");
    if (scan_id.first < scan_id.second)
        return {scan_id.first, scan_id.second, false};
    return {scan_id.second, scan_id.first, true};
}

std::vector<double> axis_points(double max_fs, std::size_t r) {
    const std::size_t n = steps_for(max_fs, r) + 1;
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = static_cast<double>(i) / static_cast<double>(r);
    return out;
}

}  // namespace

ResponseGrid coherence2d(const QuantumSystem& sys,
                         const std::vector<double>& time_delays_fs,
                         const Diagram& diagram,
                         const std::pair<std::size_t, std::size_t>& scan_id,
                         std::size_t r, const RunOptions& opts) {
    if (time_delays_fs.size() != diagram.interactions.size())
        throw ValidationError("coherence2d: delay count mismatch");
    if (r < 1) throw ValidationError("coherence2d: resolution must be >= 1");
    const ScanPlan plan = make_plan(scan_id, time_delays_fs.size());
    const std::size_t dim = sys.dim();
    const double h = 1.0 / static_cast<double>(r);

    const std::vector<double> axis_a = axis_points(time_delays_fs[plan.s1], r);
    const std::vector<double> axis_b = axis_points(time_delays_fs[plan.s2], r);
    const std::size_t na = axis_a.size(), nb = axis_b.size();

    Propagator prop(sys.model, Propagator::Direction::state);
    Propagator adj(sys.model, Propagator::Direction::adjoint);

    // prefix: everything before the first scanned interval
    CMatrix state = sys.rho_init.mat;
    {
        auto ws = prop.make_workspace();
        CMatrix scratch(dim);
        for (std::size_t m = 0; m <= plan.s1; ++m) {
            apply_interaction(sys, diagram.interactions[m], state, scratch);
            if (m < plan.s1) {
                const std::size_t steps = steps_for(time_delays_fs[m], r);
                for (std::size_t s = 0; s < steps; ++s) prop.step(state, h, ws);
            }
        }
        check_finite(state, "scan prefix");
    }

    // axis-1 checkpoints, one RK4 step apart
    std::vector<CMatrix> checkpoints;
    checkpoints.reserve(na);
    {
        auto ws = prop.make_workspace();
        checkpoints.push_back(state);
        for (std::size_t i = 1; i < na; ++i) {
            prop.step(state, h, ws);
            checkpoints.push_back(state);
        }
        check_finite(checkpoints.back(), "axis-1 checkpoint pass");
    }

    // detection operator with the post-scan tail folded in, then its
    // adjoint-evolved family along axis 2
    std::string desc;
    CMatrix deff = detection_operator(sys, diagram, opts, &desc);
    {
        auto ws = adj.make_workspace();
        CMatrix scratch(dim);
        for (std::size_t m = diagram.interactions.size(); m-- > plan.s2 + 1;) {
            const std::size_t steps = steps_for(time_delays_fs[m], r);
            for (std::size_t s = 0; s < steps; ++s) adj.step(deff, h, ws);
            fold_interaction(sys, diagram.interactions[m], deff, scratch);
        }
    }
    std::vector<CMatrix> det_family;
    det_family.reserve(nb);
    {
        auto ws = adj.make_workspace();
        det_family.push_back(deff);
        for (std::size_t k = 1; k < nb; ++k) {
            adj.step(deff, h, ws);
            det_family.push_back(deff);
        }
        check_finite(det_family.back(), "axis-2 detection pass");
    }

    ResponseGrid grid;
    grid.axis1_fs = plan.swapped ? axis_b : axis_a;
    grid.axis2_fs = plan.swapped ? axis_a : axis_b;
    grid.delays_fs = time_delays_fs;
    grid.scan_id = {scan_id.first, scan_id.second};
    grid.diagram = diagram;
    grid.r = r;
    grid.detection = desc;
    grid.values.assign(na * nb, cplx(0.0));

    const double sign = static_cast<double>(diagram.sign);
    const std::size_t jobs = resolve_jobs(opts);
    const auto& kern = kernels::active();

    run_rows(na, jobs, [&](std::size_t i) {
        auto ws = prop.make_workspace();
        CMatrix row = checkpoints[i];
        CMatrix scratch(dim);
        for (std::size_t m = plan.s1 + 1; m <= plan.s2; ++m) {
            apply_interaction(sys, diagram.interactions[m], row, scratch);
            if (m < plan.s2) {
                const std::size_t steps = steps_for(time_delays_fs[m], r);
                for (std::size_t s = 0; s < steps; ++s) prop.step(row, h, ws);
            }
        }
        check_finite(row, "row " + std::to_string(i));
        const CMatrix row_t = algebra::transpose(row);
        for (std::size_t k = 0; k < nb; ++k) {
            const cplx v = kern.cdot(det_family[k].data(), row_t.data(),
                                     dim * dim);
            // grid rows follow the caller's scan_id order
            if (plan.swapped)
                grid.values[k * na + i] = sign * v;
            else
                grid.values[i * nb + k] = sign * v;
        }
    });
    return grid;
}

ResponseGrid coherence2d_reference(
    const QuantumSystem& sys, const std::vector<double>& time_delays_fs,
    const Diagram& diagram, const std::pair<std::size_t, std::size_t>& scan_id,
    std::size_t r, const RunOptions& opts) {
    if (time_delays_fs.size() != diagram.interactions.size())
        throw ValidationError("coherence2d: delay count mismatch");
    make_plan(scan_id, time_delays_fs.size());  // validates the indices

    ResponseGrid grid;
    grid.axis1_fs = axis_points(time_delays_fs[scan_id.first], r);
    grid.axis2_fs = axis_points(time_delays_fs[scan_id.second], r);
    grid.delays_fs = time_delays_fs;
    grid.scan_id = {scan_id.first, scan_id.second};
    grid.diagram = diagram;
    grid.r = r;
    detection_operator(sys, diagram, opts, &grid.detection);
    grid.values.assign(grid.axis1_fs.size() * grid.axis2_fs.size(), cplx(0.0));

    RunOptions scalar_opts = opts;
    scalar_opts.parallel = false;
    for (std::size_t i = 0; i < grid.axis1_fs.size(); ++i)
        for (std::size_t k = 0; k < grid.axis2_fs.size(); ++k) {
            DiagramRun run;
            run.diagram = diagram;
            run.delays_fs = time_delays_fs;
            run.delays_fs[scan_id.first] = grid.axis1_fs[i];
            run.delays_fs[scan_id.second] = grid.axis2_fs[k];
            run.r = r;
            const auto res = execute(sys, run, false, scalar_opts);
            grid.at(i, k) = res.value;
        }
    return grid;
}

std::vector<ResponseGrid> pop_study(
    const QuantumSystem& sys, const std::vector<double>& pop_times_fs,
    std::size_t pop_index, const std::vector<double>& time_delays_fs,
    const Diagram& diagram, const std::pair<std::size_t, std::size_t>& scan_id,
    std::size_t r, const RunOptions& opts) {
    if (pop_index >= time_delays_fs.size())
        throw ValidationError("pop_study: pop_index out of range");
    if (pop_index == scan_id.first || pop_index == scan_id.second)
        throw ValidationError("pop_study: pop_index cannot be scanned");
    std::vector<ResponseGrid> out;
    out.reserve(pop_times_fs.size());
    for (double pt : pop_times_fs) {
        std::vector<double> delays = time_delays_fs;
        delays[pop_index] = pt;
        out.push_back(coherence2d(sys, delays, diagram, scan_id, r, opts));
    }
    return out;
}

LinearResponse linear_response(const QuantumSystem& sys, double scan_time_fs,
                               const std::optional<Diagram>& diagram,
                               std::size_t r) {
    if (scan_time_fs <= 0.0)
        throw ValidationError("linear_response: scan_time must be > 0");
    if (r < 1) throw ValidationError("linear_response: resolution must be >= 1");
    const std::size_t dim = sys.dim();
    CMatrix state = sys.rho_init.mat;
    CMatrix scratch(dim);
    double sign = 1.0;
    if (diagram) {
        for (const Interaction& ix : diagram->interactions)
            apply_interaction(sys, ix, state, scratch);
        sign = static_cast<double>(diagram->sign);
    } else {
        // default first-order pathway: one bra-side excitation
        const auto& k = kernels::active();
        k.gemm(scratch.data(), state.data(), sys.mu_minus.mat.data(), dim,
               cplx(1.0), cplx(0.0));
        std::swap(state, scratch);
    }

    Propagator prop(sys.model);
    auto ws = prop.make_workspace();
    const double h = 1.0 / static_cast<double>(r);
    const std::size_t steps = steps_for(scan_time_fs, r);

    LinearResponse out;
    out.times_fs.reserve(steps + 1);
    out.mu_series.reserve(steps + 1);
    out.times_fs.push_back(0.0);
    out.mu_series.push_back(sign * algebra::trace_mul(sys.mu.mat, state));
    for (std::size_t s = 0; s < steps; ++s) {
        prop.step(state, h, ws);
        if (algebra::has_non_finite(state))
            throw DivergenceError("linear_response: non-finite state at step " +
                                  std::to_string(s + 1));
        out.times_fs.push_back((s + 1) * h);
        out.mu_series.push_back(sign * algebra::trace_mul(sys.mu.mat, state));
    }
    return out;
}

namespace {

std::string join_doubles(const std::vector<double>& v) {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out << ',';
        out << v[i];
    }
    return out.str();
}

void write_csv(const std::string& path, const ResponseGrid& grid, bool real) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path);
    out.precision(17);
    const std::size_t n2 = grid.axis2_fs.size();
    for (std::size_t i = 0; i < grid.axis1_fs.size(); ++i) {
        for (std::size_t k = 0; k < n2; ++k) {
            if (k) out << ',';
            const cplx v = grid.at(i, k);
            out << (real ? v.real() : v.imag());
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace

void save_grid(const std::string& dir, const ResponseGrid& grid) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());

    std::ofstream meta(dir + "/metadata.txt");
    if (!meta) throw IoError("cannot open " + dir + "/metadata.txt");
    meta << "format = specforge-grid/1\n";
    meta << "diagram = " << diagrams::to_dsl(grid.diagram) << '\n';
    meta << "detection = " << grid.detection << '\n';
    meta << "sign_applied = true\n";
    meta << "delays_fs = " << join_doubles(grid.delays_fs) << '\n';
    meta << "scan_id = " << grid.scan_id[0] << ',' << grid.scan_id[1] << '\n';
    meta << "r_per_fs = " << grid.r << '\n';
    meta << "axis1_len = " << grid.axis1_fs.size() << '\n';
    meta << "axis2_len = " << grid.axis2_fs.size() << '\n';
    if (!meta) throw IoError("metadata write failed in " + dir);
    meta.close();

    write_csv(dir + "/real.csv", grid, true);
    write_csv(dir + "/imag.csv", grid, false);
}

namespace {

std::vector<std::vector<double>> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

ResponseGrid load_grid(const std::string& dir) {
    std::ifstream meta(dir + "/metadata.txt");
    if (!meta) throw IoError("cannot open " + dir + "/metadata.txt");
    ResponseGrid grid;
    std::size_t n1 = 0, n2 = 0;
    std::string line;
    while (std::getline(meta, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "format" && val != "specforge-grid/1")
            throw ParseError(dir + ": unknown grid format " + val);
        else if (key == "diagram")
            grid.diagram = diagrams::parse(val);
        else if (key == "detection")
            grid.detection = val;
        else if (key == "delays_fs") {
            std::istringstream vs(val);
            std::string tok;
            while (std::getline(vs, tok, ',')) grid.delays_fs.push_back(std::stod(tok));
        } else if (key == "scan_id") {
            std::istringstream vs(val);
            std::string tok;
            while (std::getline(vs, tok, ',')) grid.scan_id.push_back(std::stoul(tok));
        } else if (key == "r_per_fs")
            grid.r = std::stoul(val);
        else if (key == "axis1_len")
            n1 = std::stoul(val);
        else if (key == "axis2_len")
            n2 = std::stoul(val);
    }
    if (n1 == 0 || n2 == 0 || grid.r == 0)
        throw ParseError(dir + ": incomplete grid metadata");
    grid.axis1_fs.resize(n1);
    for (std::size_t i = 0; i < n1; ++i)
        grid.axis1_fs[i] = static_cast<double>(i) / static_cast<double>(grid.r);
    grid.axis2_fs.resize(n2);
    for (std::size_t i = 0; i < n2; ++i)
        grid.axis2_fs[i] = static_cast<double>(i) / static_cast<double>(grid.r);

    const auto re = read_csv(dir + "/real.csv");
    const auto im = read_csv(dir + "/imag.csv");
    if (re.size() != n1 || im.size() != n1)
        throw ParseError(dir + ": csv row count does not match metadata");
    grid.values.assign(n1 * n2, cplx(0.0));
    for (std::size_t i = 0; i < n1; ++i) {
        if (re[i].size() != n2 || im[i].size() != n2)
            throw ParseError(dir + ": csv column count does not match metadata");
        for (std::size_t k = 0; k < n2; ++k)
            grid.at(i, k) = cplx(re[i][k], im[i][k]);
    }
    return grid;
}

}  // namespace specforge::response
