#include "hyperfast/problems.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "hyperfast/random.hpp"

namespace hyperfast {

namespace {

// psi(t) = log(1 + e^t) and its derivatives, written in terms of sigma(t).
double softplus(double t) {
    return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t)));
}

double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(std::string_view tok, T& out) {
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, out);
    return ec == std::errc() && ptr == end;
}

}  // namespace

void Dataset::validate() const {
    if (features.rows() < 1 || features.cols() < 1) throw ConfigError("dataset: need m, n >= 1");
    if (labels.size() != features.rows()) throw ConfigError("dataset: label count differs from row count");
    for (Eigen::Index k = 0; k < labels.size(); ++k) {
        if (labels[k] != 1.0 && labels[k] != -1.0) throw ConfigError("dataset: labels must be +-1");
    }
    if (!features.allFinite()) throw ConfigError("dataset: non-finite feature");
}

Dataset parse_libsvm(std::string_view text) {
    struct Row {
        double label;
        std::vector<std::pair<long, double>> entries;
    };
    std::vector<Row> rows;
    long max_index = 0;
    std::size_t line_no = 0;

    while (!text.empty()) {
        const auto nl = text.find('\n');
        const std::string_view raw = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;

        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;

        auto fail = [&](const std::string& msg) {
            throw FormatError("libsvm line " + std::to_string(line_no) + ": " + msg);
        };

        std::vector<std::string_view> tokens;
        while (!line.empty()) {
            const auto sp = line.find_first_of(" \t");
            tokens.push_back(line.substr(0, sp));
            line = sp == std::string_view::npos ? std::string_view{} : trim(line.substr(sp));
        }

        Row row;
        if (!parse_number(tokens[0], row.label)) fail("unparseable label '" + std::string(tokens[0]) + "'");
        if (row.label == 0.0 || row.label == -1.0) {
            row.label = -1.0;
        } else if (row.label == 1.0) {
            row.label = 1.0;
        } else {
            fail("label must be one of 0, -1, 1, +1");
        }

        long prev = 0;
        for (std::size_t t = 1; t < tokens.size(); ++t) {
            const auto colon = tokens[t].find(':');
            if (colon == std::string_view::npos) fail("expected <index>:<value>, got '" + std::string(tokens[t]) + "'");
            long idx = 0;
            double val = 0.0;
            if (!parse_number(tokens[t].substr(0, colon), idx)) fail("unparseable index");
            if (!parse_number(tokens[t].substr(colon + 1), val)) fail("unparseable value");
            if (idx < 1) fail("indices are 1-based");
            if (idx <= prev) fail("indices must be strictly increasing");
            if (!std::isfinite(val)) fail("non-finite value");
            prev = idx;
            row.entries.emplace_back(idx, val);
        }
        max_index = std::max(max_index, prev);
        rows.push_back(std::move(row));
    }

    if (rows.empty()) throw FormatError("libsvm: no data rows");
    if (max_index < 1) throw FormatError("libsvm: no features");

    Dataset d;
    d.features = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), max_index);
    d.labels.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const auto r = static_cast<Eigen::Index>(k);
        d.labels[r] = rows[k].label;
        for (const auto& [idx, val] : rows[k].entries) d.features(r, idx - 1) = val;
    }
    return d;
}

Dataset load_libsvm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("libsvm: cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_libsvm(buf.str());
}

Dataset synth_logreg(std::uint64_t seed, Eigen::Index m, Eigen::Index n) {
    if (m < 1 || n < 1) throw ConfigError("synth_logreg: need m, n >= 1");
    Rng rng(seed);
    Vector w = rng.normal_vector(n);
    if (w.norm() == 0.0) w = Vector::Unit(n, 0);
    w.normalize();

    Dataset d;
    d.features.resize(m, n);
    d.labels.resize(m);
    for (Eigen::Index k = 0; k < m; ++k) {
        Vector a = rng.normal_vector(n);
        if (a.norm() == 0.0) a = Vector::Unit(n, 0);
        a.normalize();
        d.features.row(k) = a.transpose();
        double label = a.dot(w) >= 0.0 ? 1.0 : -1.0;
        if (rng.uniform() < 0.1) label = -label;
        d.labels[k] = label;
    }
    return d;
}

double logistic_c3() {
    // With u = sigma(1 - sigma) in (0, 1/4]: psi'''' = u (1 - 6u). On that range
    // |u (1 - 6u)| peaks at the endpoint u = 1/4 (t = 0) with value 1/8; the
    // interior extremum at u = 1/12 only reaches 1/24.
    const double u = 0.25;
    return std::abs(u * (1.0 - 6.0 * u));
}

LogisticOracle::LogisticOracle(Dataset data, double ridge) : data_(std::move(data)), ridge_(ridge) {
    data_.validate();
    if (!(ridge_ >= 0.0)) throw ConfigError("logreg: ridge must be non-negative");
    const double mean_a4 = data_.features.rowwise().squaredNorm().array().square().mean();
    l3_ = logistic_c3() * mean_a4;
    if (!(l3_ > 0.0)) throw ConfigError("logreg: all feature rows are zero");
}

Vector LogisticOracle::margins(const VectorRef& x) const {
    require_same_dim(x.size(), dim(), "logreg");
    // t_k = -y_k <a_k, x>
    return -(data_.labels.array() * (data_.features * x).array()).matrix();
}

double LogisticOracle::value(const VectorRef& x) const {
    const Vector t = margins(x);
    double sum = 0.0;
    for (Eigen::Index k = 0; k < t.size(); ++k) sum += softplus(t[k]);
    return sum / static_cast<double>(t.size()) + 0.5 * ridge_ * x.squaredNorm();
}

Vector LogisticOracle::gradient(const VectorRef& x) const {
    const Vector t = margins(x);
    Vector w(t.size());
    for (Eigen::Index k = 0; k < t.size(); ++k) w[k] = -data_.labels[k] * sigmoid(t[k]);
    return data_.features.transpose() * w / static_cast<double>(t.size()) + ridge_ * x;
}

Matrix LogisticOracle::hessian(const VectorRef& x) const {
    const Vector t = margins(x);
    Vector w(t.size());
    for (Eigen::Index k = 0; k < t.size(); ++k) {
        const double s = sigmoid(t[k]);
        w[k] = s * (1.0 - s);
    }
    const auto m = static_cast<double>(t.size());
    Matrix h = data_.features.transpose() * w.asDiagonal() * data_.features / m;
    h.diagonal().array() += ridge_;
    return h;
}

Matrix LogisticOracle::third_matrix(const VectorRef& x, const VectorRef& s) const {
    const Vector t = margins(x);
    const Vector as = data_.features * s;
    Vector w(t.size());
    for (Eigen::Index k = 0; k < t.size(); ++k) {
        const double sg = sigmoid(t[k]);
        const double psi3 = sg * (1.0 - sg) * (1.0 - 2.0 * sg);
        w[k] = -data_.labels[k] * psi3 * as[k];
    }
    return data_.features.transpose() * w.asDiagonal() * data_.features / static_cast<double>(t.size());
}

Vector LogisticOracle::third_action(const VectorRef& x, const VectorRef& s) const {
    const Vector t = margins(x);
    const Vector as = data_.features * s;
    Vector w(t.size());
    for (Eigen::Index k = 0; k < t.size(); ++k) {
        const double sg = sigmoid(t[k]);
        const double psi3 = sg * (1.0 - sg) * (1.0 - 2.0 * sg);
        w[k] = -data_.labels[k] * psi3 * as[k] * as[k];
    }
    return data_.features.transpose() * w / static_cast<double>(t.size());
}

WorstCaseOracle::WorstCaseOracle(Eigen::Index n) : n_(n) {
    if (n < 1) throw ConfigError("worst_case: n must be >= 1");
    // D'D is tridiagonal: 2 on the diagonal except the last entry (1), -1 off it.
    Matrix dtd = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dtd(i, i) = i + 1 < n ? 2.0 : 1.0;
        if (i + 1 < n) dtd(i, i + 1) = dtd(i + 1, i) = -1.0;
    }
    const double norm_d_sq = operator_norm(dtd);
    l3_ = 24.0 * norm_d_sq * norm_d_sq;
}

Vector WorstCaseOracle::diff(const VectorRef& x) const {
    require_same_dim(x.size(), n_, "worst_case");
    Vector d(n_);
    d[0] = x[0];
    for (Eigen::Index i = 1; i < n_; ++i) d[i] = x[i] - x[i - 1];
    return d;
}

Vector WorstCaseOracle::diff_transpose(const VectorRef& d) const {
    Vector out(n_);
    for (Eigen::Index i = 0; i < n_; ++i) out[i] = d[i] - (i + 1 < n_ ? d[i + 1] : 0.0);
    return out;
}

double WorstCaseOracle::value(const VectorRef& x) const {
    return diff(x).array().pow(4).sum();
}

Vector WorstCaseOracle::gradient(const VectorRef& x) const {
    const Vector d = diff(x);
    return diff_transpose((4.0 * d.array().cube()).matrix());
}

namespace {

// D' diag(w) D for the lower-bidiagonal difference operator D.
Matrix difference_congruence(const Vector& w) {
    const auto n = w.size();
    Matrix h = Matrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        h(i, i) = w[i] + (i + 1 < n ? w[i + 1] : 0.0);
        if (i + 1 < n) h(i, i + 1) = h(i + 1, i) = -w[i + 1];
    }
    return h;
}

}  // namespace

Matrix WorstCaseOracle::hessian(const VectorRef& x) const {
    const Vector d = diff(x);
    return difference_congruence((12.0 * d.array().square()).matrix());
}

Matrix WorstCaseOracle::third_matrix(const VectorRef& x, const VectorRef& s) const {
    const Vector d = diff(x);
    const Vector ds = diff(s);
    return difference_congruence((24.0 * d.array() * ds.array()).matrix());
}

QuarticOracle::QuarticOracle(Matrix q, Vector c, double a4, double l3_floor)
    : q_(std::move(q)), c_(std::move(c)), a4_(a4) {
    const auto n = c_.size();
    if (n < 1) throw ConfigError("quartic: dimension must be >= 1");
    if (q_.rows() != n || q_.cols() != n) throw ConfigError("quartic: Q must be n x n");
    if (!q_.allFinite() || !c_.allFinite()) throw ConfigError("quartic: non-finite data");
    const double qn = q_.norm();
    if ((q_ - q_.transpose()).norm() > 1e-12 * (1.0 + qn)) throw ConfigError("quartic: Q must be symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(q_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()[0] < -1e-10 * (1.0 + qn)) throw ConfigError("quartic: Q must be positive semidefinite");
    if (!(a4_ >= 0.0)) throw ConfigError("quartic: a4 must be non-negative");
    l3_ = std::max(6.0 * a4_, l3_floor);
}

double QuarticOracle::value(const VectorRef& x) const {
    require_same_dim(x.size(), dim(), "quartic");
    const double r2 = x.squaredNorm();
    return 0.5 * x.dot(q_ * x) + c_.dot(x) + 0.25 * a4_ * r2 * r2;
}

Vector QuarticOracle::gradient(const VectorRef& x) const {
    require_same_dim(x.size(), dim(), "quartic");
    return q_ * x + c_ + a4_ * x.squaredNorm() * x;
}

Matrix QuarticOracle::hessian(const VectorRef& x) const {
    require_same_dim(x.size(), dim(), "quartic");
    Matrix h = q_ + 2.0 * a4_ * x * x.transpose();
    h.diagonal().array() += a4_ * x.squaredNorm();
    return h;
}

Matrix QuarticOracle::third_matrix(const VectorRef& x, const VectorRef& s) const {
    Matrix t = 2.0 * a4_ * (x * s.transpose() + s * x.transpose());
    t.diagonal().array() += 2.0 * a4_ * x.dot(s);
    return t;
}

Vector QuarticOracle::third_action(const VectorRef& x, const VectorRef& s) const {
    return a4_ * (4.0 * x.dot(s) * s + 2.0 * s.squaredNorm() * x);
}

SumOracle::SumOracle(OraclePtr a, OraclePtr b) : a_(std::move(a)), b_(std::move(b)) {
    if (!a_ || !b_) throw ConfigError("sum: null oracle");
    require_same_dim(a_->dim(), b_->dim(), "sum");
}

Matrix SumOracle::third_matrix(const VectorRef& x, const VectorRef& s) const {
    return a_->third_matrix(x, s) + b_->third_matrix(x, s);
}

Vector SumOracle::third_action(const VectorRef& x, const VectorRef& s) const {
    return a_->third_action(x, s) + b_->third_action(x, s);
}

std::shared_ptr<LogisticOracle> make_logreg(Dataset data, double ridge) {
    return std::make_shared<LogisticOracle>(std::move(data), ridge);
}

std::shared_ptr<WorstCaseOracle> make_worst_case(int p, Eigen::Index n) {
    if (p != 3) throw ConfigError("worst_case: only order p = 3 is supported");
    return std::make_shared<WorstCaseOracle>(n);
}

std::shared_ptr<QuarticOracle> make_quartic(Matrix q, Vector c, double a4, double l3_floor) {
    return std::make_shared<QuarticOracle>(std::move(q), std::move(c), a4, l3_floor);
}

}  // namespace hyperfast
