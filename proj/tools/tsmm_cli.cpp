#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tsmm/tsmm.hpp"

namespace {

struct CommonOpts {
    long m = 2048;
    long k = 2048;
    long n = 8;
    std::vector<long> n_list;
    std::string dtype = "f32";
    int reps = 200;
    int threads = 0;
    std::string mode = "prepack";
    std::uint32_t seed = 42;
    std::string csv_path;
    std::string profile_path;
    std::string plan_cache = "tsmm_plan_cache.txt";
    std::string kernel_cache = "tsmm_kernel_cache.txt";
    std::string dump_packed_path;
    bool retune = false;
};

tsmm::HardwareProfile resolve_profile(const CommonOpts& o) {
    tsmm::HardwareProfile hw = o.profile_path.empty()
                                   ? tsmm::probe_profile()
                                   : tsmm::load_profile_file(o.profile_path);
    if (const char* env = std::getenv("TSMM_THREADS")) {
        long t = std::atol(env);
        if (t > 0) hw.max_threads = t;
    }
    if (o.threads > 0) hw.max_threads = o.threads;  // flag wins over env
    return hw;
}

tsmm::Precision resolve_dtype(const std::string& d) {
    if (d == "f32") return tsmm::Precision::Single;
    if (d == "f64") return tsmm::Precision::Double;
    throw tsmm::SpecError("dtype must be f32 or f64");
}

tsmm::BenchMode resolve_mode(const std::string& m) {
    if (m == "prepack") return tsmm::BenchMode::Prepack;
    if (m == "pack-per-call") return tsmm::BenchMode::PackPerCall;
    if (m == "naive") return tsmm::BenchMode::Naive;
    throw tsmm::SpecError("mode must be prepack, pack-per-call or naive");
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
    if (path.empty()) {
        for (const auto& l : lines) std::cout << l << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out) throw tsmm::SpecError("cannot open csv path " + path);
    for (const auto& l : lines) out << l << '\n';
    std::cout << "wrote " << lines.size() << " lines to " << path << '\n';
}

template <class T>
tsmm::KernelSelection pick_kernel(const CommonOpts& o,
                                  const tsmm::HardwareProfile& hw,
                                  const tsmm::KernelCatalog<T>& cat) {
    tsmm::TrialConfig trial;
    return tsmm::select_kernel_cached(cat, hw, trial, o.kernel_cache, o.retune);
}

template <class T>
int cmd_bench(const CommonOpts& o) {
    tsmm::HardwareProfile hw = resolve_profile(o);
    auto cat = tsmm::build_catalog<T>(hw);
    auto sel = pick_kernel(o, hw, cat);

    tsmm::BenchSpec spec;
    spec.m = o.m;
    spec.k = o.k;
    spec.n_list = o.n_list.empty() ? std::vector<long>{o.n} : o.n_list;
    spec.precision = tsmm::precision_of<T>();
    spec.reps = o.reps;
    spec.threads = o.threads;
    spec.mode = resolve_mode(o.mode);
    spec.seed = o.seed;

    tsmm::TrialConfig tune_trial;
    tune_trial.warmups = 1;
    tune_trial.repetitions = 3;
    auto records = tsmm::run_bench<T>(spec, hw, sel, cat, tune_trial);

    std::vector<std::string> lines;
    lines.emplace_back(tsmm::bench_csv_header());
    for (const auto& r : records) lines.push_back(tsmm::bench_csv_row(r));
    write_lines(o.csv_path, lines);

    if (!o.dump_packed_path.empty() && spec.mode != tsmm::BenchMode::Naive) {
        tsmm::Problem p;
        p.m = spec.m;
        p.k = spec.k;
        p.n = spec.n_list.front();
        p.precision = spec.precision;
        auto plan = tsmm::tune<T>(p, hw, sel, cat, tune_trial);
        std::vector<T> a(p.m * p.k), b(p.k * p.n);
        std::mt19937 rng(spec.seed);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (auto& v : a) v = static_cast<T>(dist(rng));
        for (auto& v : b) v = static_cast<T>(dist(rng));
        auto pa = tsmm::pack_a<T>(T(1), tsmm::MatrixView<T>::row_major(a.data(), p.m, p.k), plan);
        auto pb = tsmm::pack_b<T>(T(1), tsmm::MatrixView<T>::row_major(b.data(), p.k, p.n), plan);
        std::ofstream out(o.dump_packed_path, std::ios::binary);
        if (!out) throw tsmm::SpecError("cannot open " + o.dump_packed_path);
        tsmm::dump_packed(pa, out);
        tsmm::dump_packed(pb, out);
        std::cout << "dumped packed buffers to " << o.dump_packed_path << '\n';
    }
    return 0;
}

template <class T>
int cmd_tune(const CommonOpts& o) {
    tsmm::HardwareProfile hw = resolve_profile(o);
    auto cat = tsmm::build_catalog<T>(hw);
    auto sel = pick_kernel(o, hw, cat);

    tsmm::Problem p;
    p.m = o.m;
    p.k = o.k;
    p.n = o.n;
    p.precision = tsmm::precision_of<T>();

    tsmm::ExecutionPlan plan;
    bool from_cache = false;
    if (!o.retune && tsmm::lookup_plan_cache(o.plan_cache, p, plan)) {
        from_cache = true;
    } else {
        tsmm::TrialConfig trial;
        plan = tsmm::tune<T>(p, hw, sel, cat, trial);
        tsmm::append_plan_cache(o.plan_cache, plan);
    }
    std::cout << "problem: m=" << p.m << " k=" << p.k << " n=" << p.n
              << " dtype=" << tsmm::precision_name(p.precision) << '\n'
              << "plan:    " << tsmm::plan_summary(plan) << '\n'
              << "gflops:  " << plan.measured_gflops
              << (from_cache ? " (from plan cache)" : "") << '\n';
    return 0;
}

int cmd_model(double z, double l, double t, long n_from, long n_to, long n_step,
              const std::string& csv_path) {
    if (l < 1 || t < 1 || z <= 0 || n_step < 1 || n_to < n_from)
        throw tsmm::SpecError("model: invalid flags");
    std::vector<std::string> lines;
    lines.emplace_back("n,naive,blocked,prepack");
    for (long n = n_from; n <= n_to; n += n_step) {
        tsmm::CacheModelInput in;
        in.n = static_cast<double>(n);
        in.z = z;
        in.l = l;
        in.t = t;
        std::ostringstream os;
        os << n << ',' << tsmm::misses_naive(in) << ','
           << tsmm::misses_blocked(in) << ',' << tsmm::misses_prepack(in);
        lines.push_back(os.str());
    }
    write_lines(csv_path, lines);
    return 0;
}

template <class T>
int cmd_kernels(const CommonOpts& o) {
    tsmm::HardwareProfile hw = resolve_profile(o);
    auto cat = tsmm::build_catalog<T>(hw);
    std::cout << "catalog (" << tsmm::precision_name(tsmm::precision_of<T>())
              << ", " << hw.vector_bits << "-bit vectors, "
              << hw.simd_register_count << " registers):\n";
    for (const auto& k : cat.entries) {
        std::cout << "  " << k.name << "  m_r=" << k.shape.m_r
                  << " n_r=" << k.shape.n_r << " k_unroll=" << k.shape.k_unroll
                  << "  fma_ratio="
                  << tsmm::tile_flop_to_load_ratio(k.shape, hw,
                                                   tsmm::precision_of<T>())
                  << '\n';
    }
    auto sel = pick_kernel(o, hw, cat);
    std::cout << "selected: " << sel.kernel_name << "  gflops="
              << sel.measured_gflops << "  fingerprint="
              << sel.profile_fingerprint << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pre-pack tall-and-skinny matrix multiplication benchmark"};
    app.require_subcommand(1);

    CommonOpts o;
    double model_z = 12288, model_l = 8, model_t = 1;
    long model_n_from = 0, model_n_to = 4096, model_n_step = 256;

    auto add_common = [&](CLI::App* cmd, bool with_bench_flags) {
        cmd->add_option("--m", o.m, "rows of A/C");
        cmd->add_option("--k", o.k, "depth");
        cmd->add_option("--n", o.n, "cols of B/C");
        cmd->add_option("--dtype", o.dtype, "f32 or f64");
        cmd->add_option("--threads", o.threads, "thread count (overrides TSMM_THREADS)");
        cmd->add_option("--profile", o.profile_path, "hardware profile file");
        cmd->add_option("--plan-cache", o.plan_cache, "plan cache file");
        cmd->add_option("--kernel-cache", o.kernel_cache, "kernel cache file");
        cmd->add_flag("--retune", o.retune, "ignore cached plans/kernels");
        if (with_bench_flags) {
            cmd->add_option("--n-list", o.n_list, "comma-separated n values")->delimiter(',');
            cmd->add_option("--reps", o.reps, "repetitions");
            cmd->add_option("--mode", o.mode, "prepack | pack-per-call | naive");
            cmd->add_option("--seed", o.seed, "matrix RNG seed");
            cmd->add_option("--csv", o.csv_path, "CSV output path");
            cmd->add_option("--dump-packed", o.dump_packed_path,
                            "dump packed buffers to a binary file");
        }
    };

    auto* bench = app.add_subcommand("bench", "run throughput experiments");
    add_common(bench, true);
    auto* tune = app.add_subcommand("tune", "generate an execution plan");
    add_common(tune, false);
    auto* kernels = app.add_subcommand("kernels", "list kernel catalog and selection");
    add_common(kernels, false);
    auto* model = app.add_subcommand("model", "cache-miss model table");
    model->add_option("--z", model_z, "cache size in elements");
    model->add_option("--l", model_l, "cache line in elements");
    model->add_option("--t", model_t, "thread count");
    model->add_option("--n-from", model_n_from, "first n");
    model->add_option("--n-to", model_n_to, "last n");
    model->add_option("--n-step", model_n_step, "n increment");
    model->add_option("--csv", o.csv_path, "CSV output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        const bool f64 = o.dtype == "f64";
        if (o.dtype != "f32" && o.dtype != "f64")
            throw tsmm::SpecError("dtype must be f32 or f64");
        if (bench->parsed()) return f64 ? cmd_bench<double>(o) : cmd_bench<float>(o);
        if (tune->parsed()) return f64 ? cmd_tune<double>(o) : cmd_tune<float>(o);
        if (kernels->parsed())
            return f64 ? cmd_kernels<double>(o) : cmd_kernels<float>(o);
        if (model->parsed())
            return cmd_model(model_z, model_l, model_t, model_n_from, model_n_to,
                             model_n_step, o.csv_path);
    } catch (const tsmm::OracleMismatch& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const tsmm::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
