// solve: run one configured method and write its trace and summary.
#include <iostream>

#include "CLI11.hpp"
#include "hyperfast/harness.hpp"

int main(int argc, char** argv) {
    using namespace hyperfast;

    CLI::App app{"Accelerated third-order method driven by gradients and Hessians"};
    std::string config_path, problem, method, trace, summary;
    std::optional<double> eps;
    std::optional<int> max_iters;
    std::optional<std::uint64_t> seed;
    app.add_option("--config", config_path, "flat key = value config file")->required()->check(CLI::ExistingFile);
    app.add_option("--problem", problem, "quartic1d, quartic, quadratic, worst_case, logreg, sliding_benchmark");
    app.add_option("--method", method, "hyperfast, natmi-exact, sliding, gd");
    app.add_option("--eps", eps, "target accuracy");
    app.add_option("--max-iters", max_iters, "outer iteration cap");
    app.add_option("--trace", trace, "trace CSV path");
    app.add_option("--summary", summary, "summary path (key = value)");
    app.add_option("--seed", seed, "seed for synthetic problems");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        RunConfig cfg = load_config(config_path);
        if (!problem.empty()) set_config_key(cfg, "problem", problem);
        if (!method.empty()) set_config_key(cfg, "method", method);
        if (eps) cfg.eps = *eps;
        if (max_iters) cfg.max_iters = *max_iters;
        if (seed) cfg.seed = *seed;
        if (!trace.empty()) cfg.trace_path = trace;
        if (!summary.empty()) cfg.summary_path = summary;

        const RunSummary sum = run(cfg);
        if (cfg.summary_path.empty()) std::cout << sum.render(cfg);
        if (!sum.ok) {
            std::cerr << "solve: " << sum.error << "\n";
            return 3;
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "solve: " << e.what() << "\n";
        return 2;
    } catch (const FormatError& e) {
        std::cerr << "solve: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "solve: " << e.what() << "\n";
        return 3;
    }
}
