// Regenerates the logistic-regression f* fixture: long damped Newton on the
// seeded synthetic problem, written as key = value lines.
#include <fstream>
#include <iostream>

#include "hyperfast/harness.hpp"
#include "hyperfast/problems.hpp"

int main(int argc, char** argv) {
    using namespace hyperfast;
    if (argc != 2) {
        std::cerr << "usage: gen_fixture <output file>\n";
        return 2;
    }
    const std::uint64_t seed = 7;
    const Eigen::Index m = 200, n = 20;
    const double ridge = 1e-3;
    auto f = make_logreg(synth_logreg(seed, m, n), ridge);
    const Reference ref = reference_solution(*f, Vector::Zero(n), 200, 1e-13);

    std::ofstream out(argv[1]);
    out << "# synthetic logistic regression, x0 = 0; regenerate with gen_fixture\n";
    out << "seed = " << seed << "\n";
    out << "m = " << m << "\n";
    out << "n = " << n << "\n";
    out << "ridge = " << format_double(ridge) << "\n";
    out << "f_star = " << format_double(ref.f) << "\n";
    out << "grad_norm = " << format_double(ref.grad_norm) << "\n";
    out << "newton_iters = " << ref.iters << "\n";
    return out ? 0 : 1;
}
