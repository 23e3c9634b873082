#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "drokit/error.hpp"
#include "drokit/problems.hpp"

namespace drokit {

namespace {

constexpr int kDigits = 17;

void write_reals(std::ostream& out, const double* data, Eigen::Index n) {
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k) out << ' ';
    out << data[k];
  }
  out << '\n';
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw InvalidArgument("snapshot: unexpected end of input");
    return w;
  }
  double real() {
    const std::string w = word();
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(w, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != w.size()) throw InvalidArgument("snapshot: expected a number, got '" + w + "'");
    return v;
  }
  std::size_t count() {
    const double v = real();
    if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v))) {
      throw InvalidArgument("snapshot: expected a non-negative integer");
    }
    return static_cast<std::size_t>(v);
  }
  Vector vector(std::size_t n) {
    Vector v(static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 0; k < v.size(); ++k) v[k] = real();
    return v;
  }

 private:
  std::istream& in_;
};

}  // namespace

void write_snapshot(const DroProblem& problem, std::ostream& out) {
  const auto saved_flags = out.flags();
  const auto saved_precision = out.precision();
  out << std::setprecision(kDigits);

  const auto& data = problem.dataset();
  out << to_string(problem.family()) << ' ' << data.groups() << ' ' << problem.dim();
  for (auto s : data.group_sizes) out << ' ' << s;
  out << '\n';

  const auto* quadratic = dynamic_cast<const QuadraticModel*>(&problem.model());
  const auto* logistic = dynamic_cast<const LogisticModel*>(&problem.model());
  const auto* mlp = dynamic_cast<const MlpModel*>(&problem.model());

  out << problem.tau_theta() << ' ' << problem.tau_pi();
  if (quadratic) out << ' ' << quadratic->radius();
  out << '\n';
  write_reals(out, problem.prior().data(), problem.prior().size());
  for (std::size_t i = 0; i < data.strata.size(); ++i) out << (i ? " " : "") << data.strata[i];
  out << '\n';
  if (mlp) out << "mlp " << mlp->shape().input_dim << ' ' << mlp->shape().hidden << '\n';

  for (std::size_t i = 0; i < data.groups(); ++i) {
    for (std::size_t j = 0; j < data.group_sizes[i]; ++j) {
      const ItemAddress at{i, j};
      if (quadratic) {
        const auto& item = quadratic->item(at);
        out << item.a.rows() << '\n';
        for (Eigen::Index r = 0; r < item.a.rows(); ++r) {
          const Vector row = item.a.row(r).transpose();
          write_reals(out, row.data(), row.size());
        }
        write_reals(out, item.b.data(), item.b.size());
        write_reals(out, item.q.data(), item.q.size());
        out << item.r << '\n';
      } else if (logistic) {
        const auto& item = logistic->item(at);
        for (Eigen::Index k = 0; k < item.x.size(); ++k) out << item.x[k] << ' ';
        out << item.y << '\n';
      } else if (mlp) {
        const auto& item = mlp->item(at);
        for (Eigen::Index k = 0; k < item.x.size(); ++k) out << item.x[k] << ' ';
        out << item.label << '\n';
      } else {
        throw InvalidArgument("write_snapshot: unsupported loss model");
      }
    }
  }
  out.flags(saved_flags);
  out.precision(saved_precision);
}

DroProblem read_snapshot(std::istream& in) {
  Reader r(in);
  const LossFamily family = parse_loss_family(r.word());
  const std::size_t c = r.count();
  const std::size_t d = r.count();
  if (c == 0 || d == 0) throw InvalidArgument("snapshot: c and d must be positive");
  std::vector<std::size_t> sizes(c);
  for (auto& s : sizes) s = r.count();

  const double tau_theta = r.real();
  const double tau_pi = r.real();
  const double radius = family == LossFamily::quadratic ? r.real() : 1.0;
  Vector prior = r.vector(c);
  std::vector<int> strata(c);
  for (auto& s : strata) s = static_cast<int>(r.real());

  std::shared_ptr<const LossModel> model;
  switch (family) {
    case LossFamily::quadratic: {
      std::vector<std::vector<QuadraticItem>> groups(c);
      for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = 0; j < sizes[i]; ++j) {
          QuadraticItem item;
          const std::size_t rows = r.count();
          item.a.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(d));
          for (Eigen::Index row = 0; row < item.a.rows(); ++row) {
            for (Eigen::Index col = 0; col < item.a.cols(); ++col) item.a(row, col) = r.real();
          }
          item.b = r.vector(rows);
          item.q = r.vector(d);
          item.r = r.real();
          groups[i].push_back(std::move(item));
        }
      }
      model = std::make_shared<QuadraticModel>(std::move(groups), radius);
      break;
    }
    case LossFamily::logistic: {
      std::vector<std::vector<LogisticItem>> groups(c);
      for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = 0; j < sizes[i]; ++j) {
          LogisticItem item;
          item.x = r.vector(d);
          item.y = r.real();
          groups[i].push_back(std::move(item));
        }
      }
      model = std::make_shared<LogisticModel>(std::move(groups));
      break;
    }
    case LossFamily::tiny_mlp: {
      if (r.word() != "mlp") throw InvalidArgument("snapshot: missing 'mlp' shape line");
      MlpShape shape{r.count(), r.count()};
      if (shape.parameter_count() != d) throw InvalidArgument("snapshot: network shape does not match d");
      std::vector<std::vector<MlpItem>> groups(c);
      for (std::size_t i = 0; i < c; ++i) {
        for (std::size_t j = 0; j < sizes[i]; ++j) {
          MlpItem item;
          item.x = r.vector(shape.input_dim);
          item.label = static_cast<int>(r.real());
          groups[i].push_back(std::move(item));
        }
      }
      model = std::make_shared<MlpModel>(shape, std::move(groups));
      break;
    }
  }
  if (model->dim() != d) throw InvalidArgument("snapshot: header dimension does not match items");
  return DroProblem(std::move(model), tau_theta, tau_pi, std::move(prior), std::move(strata));
}

}  // namespace drokit
