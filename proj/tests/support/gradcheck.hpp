#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "negexlm/graph.hpp"

namespace negexlm::testing {

struct GradCheck {
  std::map<std::string, double> rel_error;  // per parameter tensor
  std::string worst;
  double worst_error = 0.0;
};

/// Norm-wise relative error ||a - n|| / max(||a||, ||n||) per tensor, with
/// analytic a from Graph::backward and n from central differences of step h.
/// Tensors whose gradients are both below `floor` in norm compare absolutely.
template <class Build>
GradCheck check_gradients(std::vector<num::ParameterStore*> stores, Build&& build, double h = 1e-5,
                          double floor = 1e-8) {
  num::Gradients analytic;
  {
    num::Graph g;
    for (auto* s : stores) g.register_parameters(*s);
    num::Var loss = build(g);
    analytic = g.backward(loss);
  }
  GradCheck out;
  for (auto* s : stores) {
    for (auto& p : *s) {
      if (!p.trainable) continue;
      auto& m = p.value.as_matrix();
      num::Matrix numeric(m.rows(), m.cols());
      for (Eigen::Index i = 0; i < m.size(); ++i) {
        const double saved = m.data()[i];
        m.data()[i] = saved + h;
        double up, down;
        {
          num::Graph g;
          up = build(g).scalar();
        }
        m.data()[i] = saved - h;
        {
          num::Graph g;
          down = build(g).scalar();
        }
        m.data()[i] = saved;
        numeric.data()[i] = (up - down) / (2.0 * h);
      }
      const auto it = analytic.find(p.name);
      const num::Matrix a = it == analytic.end() ? num::Matrix::Zero(m.rows(), m.cols()) : it->second.as_matrix();
      const double diff = (a - numeric).norm();
      const double scale = std::max(a.norm(), numeric.norm());
      const double err = scale < floor ? diff : diff / scale;
      out.rel_error[p.name] = err;
      if (err >= out.worst_error) {
        out.worst_error = err;
        out.worst = p.name;
      }
    }
  }
  return out;
}

}  // namespace negexlm::testing
