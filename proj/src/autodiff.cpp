#include "binmt/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace binmt::ad {

Var matmul(Graph& g, const Var& a, const Var& b) {
  Matrix v = a->val * b->val;
  return g.make(std::move(v), {a, b}, [a, b](Node& n) {
    if (a->requires_grad) a->accum_grad(n.grad * b->val.transpose());
    if (b->requires_grad) b->accum_grad(a->val.transpose() * n.grad);
  });
}

Var matmul_nt(Graph& g, const Var& a, const Var& b) {
  Matrix v = a->val * b->val.transpose();
  return g.make(std::move(v), {a, b}, [a, b](Node& n) {
    if (a->requires_grad) a->accum_grad(n.grad * b->val);
    if (b->requires_grad) b->accum_grad(n.grad.transpose() * a->val);
  });
}

Var slice_cols(Graph& g, const Var& a, Eigen::Index start, Eigen::Index len) {
  Matrix v = a->val.middleCols(start, len);
  return g.make(std::move(v), {a}, [a, start, len](Node& n) {
    if (!a->requires_grad) return;
    if (a->grad.size() == 0) a->grad = Matrix::Zero(a->val.rows(), a->val.cols());
    a->grad.middleCols(start, len) += n.grad;
  });
}

Var add(Graph& g, const Var& a, const Var& b) {
  return g.make(a->val + b->val, {a, b}, [a, b](Node& n) {
    if (a->requires_grad) a->accum_grad(n.grad);
    if (b->requires_grad) b->accum_grad(n.grad);
  });
}

Var add_rowwise(Graph& g, const Var& a, const Var& bias) {
  Matrix v = a->val.rowwise() + bias->val.row(0);
  return g.make(std::move(v), {a, bias}, [a, bias](Node& n) {
    if (a->requires_grad) a->accum_grad(n.grad);
    if (bias->requires_grad) bias->accum_grad(n.grad.colwise().sum());
  });
}

Var sub(Graph& g, const Var& a, const Var& b) {
  return g.make(a->val - b->val, {a, b}, [a, b](Node& n) {
    if (a->requires_grad) a->accum_grad(n.grad);
    if (b->requires_grad) b->accum_grad(-n.grad);
  });
}

Var cmul(Graph& g, const Var& a, const Var& b) {
  return g.make(a->val.cwiseProduct(b->val), {a, b}, [a, b](Node& n) {
    if (a->requires_grad) a->accum_grad(n.grad.cwiseProduct(b->val));
    if (b->requires_grad) b->accum_grad(n.grad.cwiseProduct(a->val));
  });
}

Var scale(Graph& g, const Var& a, double s) {
  return g.make(a->val * s, {a}, [a, s](Node& n) {
    if (a->requires_grad) a->accum_grad(n.grad * s);
  });
}

Var tanh_v(Graph& g, const Var& a) {
  Matrix v = a->val.array().tanh();
  auto out = g.make(std::move(v), {a}, nullptr);
  if (out->requires_grad) {
    Var self_parent = a;
    out->backward_fn = [self_parent](Node& n) {
      self_parent->accum_grad(
          (n.grad.array() * (1.0 - n.val.array().square())).matrix());
    };
  }
  return out;
}

Var sigmoid_v(Graph& g, const Var& a) {
  Matrix v = (1.0 / (1.0 + (-a->val.array()).exp())).matrix();
  auto out = g.make(std::move(v), {a}, nullptr);
  if (out->requires_grad) {
    Var p = a;
    out->backward_fn = [p](Node& n) {
      p->accum_grad((n.grad.array() * n.val.array() * (1.0 - n.val.array())).matrix());
    };
  }
  return out;
}

Var concat_cols(Graph& g, const std::vector<Var>& parts) {
  if (parts.empty()) throw std::runtime_error("concat_cols: no parts");
  Eigen::Index rows = parts[0]->val.rows();
  Eigen::Index cols = 0;
  for (const auto& p : parts) cols += p->val.cols();
  Matrix v(rows, cols);
  Eigen::Index off = 0;
  for (const auto& p : parts) {
    v.middleCols(off, p->val.cols()) = p->val;
    off += p->val.cols();
  }
  return g.make(std::move(v), parts, [parts](Node& n) {
    Eigen::Index off = 0;
    for (const auto& p : parts) {
      if (p->requires_grad) p->accum_grad(n.grad.middleCols(off, p->val.cols()));
      off += p->val.cols();
    }
  });
}

Var gather_rows(Graph& g, const Var& table, const std::vector<int>& ids) {
  Matrix v(static_cast<Eigen::Index>(ids.size()), table->val.cols());
  for (std::size_t i = 0; i < ids.size(); ++i) v.row(static_cast<Eigen::Index>(i)) = table->val.row(ids[i]);
  return g.make(std::move(v), {table}, [table, ids](Node& n) {
    if (!table->requires_grad) return;
    if (table->grad.size() == 0) table->grad = Matrix::Zero(table->val.rows(), table->val.cols());
    for (std::size_t i = 0; i < ids.size(); ++i)
      table->grad.row(ids[i]) += n.grad.row(static_cast<Eigen::Index>(i));
  });
}

Var softmax_rows(Graph& g, const Var& a, const Matrix* additive_mask) {
  Matrix z = a->val;
  if (additive_mask) z += *additive_mask;
  Matrix v(z.rows(), z.cols());
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    double m = z.row(r).maxCoeff();
    Eigen::ArrayXd e = (z.row(r).array() - m).exp();
    v.row(r) = (e / e.sum()).matrix();
  }
  auto out = g.make(std::move(v), {a}, nullptr);
  if (out->requires_grad) {
    Var p = a;
    out->backward_fn = [p](Node& n) {
      Matrix grad(n.val.rows(), n.val.cols());
      for (Eigen::Index r = 0; r < n.val.rows(); ++r) {
        double dot = n.grad.row(r).dot(n.val.row(r));
        grad.row(r) = (n.val.row(r).array() * (n.grad.row(r).array() - dot)).matrix();
      }
      p->accum_grad(grad);
    };
  }
  return out;
}

Var log_v(Graph& g, const Var& a) {
  Matrix v = a->val.array().log();
  return g.make(std::move(v), {a}, [a](Node& n) {
    if (a->requires_grad) a->accum_grad(n.grad.cwiseQuotient(a->val));
  });
}

Var layer_norm_rows(Graph& g, const Var& a, const Var& gain, const Var& bias, double eps) {
  const Matrix& x = a->val;
  Eigen::Index n_cols = x.cols();
  Eigen::VectorXd mean = x.rowwise().mean();
  Matrix centered = x.colwise() - mean;
  Eigen::VectorXd var = centered.array().square().rowwise().mean();
  Eigen::VectorXd inv_std = (var.array() + eps).rsqrt();
  Matrix norm = centered.array().colwise() * inv_std.array();
  Matrix v = (norm.array().rowwise() * gain->val.row(0).array()).rowwise() +
             bias->val.row(0).array();
  return g.make(std::move(v), {a, gain, bias},
                [a, gain, bias, norm, inv_std, n_cols](Node& n) {
    Matrix dnorm = n.grad.array().rowwise() * gain->val.row(0).array();
    if (gain->requires_grad)
      gain->accum_grad((n.grad.array() * norm.array()).colwise().sum().matrix());
    if (bias->requires_grad) bias->accum_grad(n.grad.colwise().sum());
    if (a->requires_grad) {
      // dx = inv_std * (dnorm - mean(dnorm) - norm * mean(dnorm*norm)) per row
      Eigen::VectorXd m1 = dnorm.rowwise().mean();
      Eigen::VectorXd m2 = (dnorm.array() * norm.array()).rowwise().mean();
      Matrix dx = ((dnorm.colwise() - m1).array() - (norm.array().colwise() * m2.array()))
                      .colwise() *
                  inv_std.array();
      a->accum_grad(dx);
    }
  });
}

Var weighted_context(Graph& g, const Var& weights, const std::vector<Var>& parts) {
  // weights: B x J; parts[j]: B x D. out(b,:) = sum_j weights(b,j) parts[j](b,:)
  if (parts.empty()) throw std::runtime_error("weighted_context: no parts");
  Eigen::Index B = weights->val.rows();
  Eigen::Index D = parts[0]->val.cols();
  Matrix v = Matrix::Zero(B, D);
  for (std::size_t j = 0; j < parts.size(); ++j)
    v += (parts[j]->val.array().colwise() *
          weights->val.col(static_cast<Eigen::Index>(j)).array())
             .matrix();
  std::vector<Var> all = parts;
  all.push_back(weights);
  return g.make(std::move(v), std::move(all), [weights, parts](Node& n) {
    for (std::size_t j = 0; j < parts.size(); ++j) {
      auto jj = static_cast<Eigen::Index>(j);
      if (parts[j]->requires_grad)
        parts[j]->accum_grad(
            (n.grad.array().colwise() * weights->val.col(jj).array()).matrix());
      if (weights->requires_grad) {
        if (weights->grad.size() == 0)
          weights->grad = Matrix::Zero(weights->val.rows(), weights->val.cols());
        weights->grad.col(jj) +=
            (n.grad.array() * parts[j]->val.array()).rowwise().sum().matrix();
      }
    }
  });
}

Var softmax_xent(Graph& g, const Var& logits, const std::vector<int>& targets,
                 const Eigen::VectorXd& mask) {
  const Matrix& z = logits->val;
  Matrix probs(z.rows(), z.cols());
  double loss = 0;
  for (Eigen::Index r = 0; r < z.rows(); ++r) {
    double m = z.row(r).maxCoeff();
    Eigen::ArrayXd e = (z.row(r).array() - m).exp();
    double s = e.sum();
    probs.row(r) = (e / s).matrix();
    if (mask(r) != 0.0)
      loss -= mask(r) * (z(r, targets[r]) - m - std::log(s));
  }
  Matrix v(1, 1);
  v(0, 0) = loss;
  return g.make(std::move(v), {logits}, [logits, probs, targets, mask](Node& n) {
    if (!logits->requires_grad) return;
    double gscale = n.grad(0, 0);
    Matrix grad = probs;
    for (Eigen::Index r = 0; r < grad.rows(); ++r) {
      grad(r, targets[r]) -= 1.0;
      grad.row(r) *= mask(r) * gscale;
    }
    logits->accum_grad(grad);
  });
}

Var sum_all(Graph& g, const Var& a) {
  Matrix v(1, 1);
  v(0, 0) = a->val.sum();
  return g.make(std::move(v), {a}, [a](Node& n) {
    if (a->requires_grad)
      a->accum_grad(Matrix::Constant(a->val.rows(), a->val.cols(), n.grad(0, 0)));
  });
}

}  // namespace binmt::ad
