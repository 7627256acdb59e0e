#include "ifv/chain.hpp"

#include "ifv/error.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <stack>

namespace ifv {

namespace {

// Iterative Tarjan; returns component id per state.
std::vector<int> scc_labels(const Mat& q, int& count) {
  const int n = static_cast<int>(q.rows());
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && q(i, j) > 0.0) adj[static_cast<std::size_t>(i)].push_back(j);

  std::vector<int> index(static_cast<std::size_t>(n), -1), low(static_cast<std::size_t>(n), 0),
      label(static_cast<std::size_t>(n), -1);
  std::vector<bool> on_stack(static_cast<std::size_t>(n), false);
  std::vector<int> stack;
  int next_index = 0;
  count = 0;
  struct Frame {
    int v;
    std::size_t edge;
  };
  for (int root = 0; root < n; ++root) {
    if (index[static_cast<std::size_t>(root)] >= 0) continue;
    std::stack<Frame> call;
    call.push({root, 0});
    index[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = next_index++;
    stack.push_back(root);
    on_stack[static_cast<std::size_t>(root)] = true;
    while (!call.empty()) {
      auto& fr = call.top();
      const auto& edges = adj[static_cast<std::size_t>(fr.v)];
      if (fr.edge < edges.size()) {
        const int w = edges[fr.edge++];
        if (index[static_cast<std::size_t>(w)] < 0) {
          index[static_cast<std::size_t>(w)] = low[static_cast<std::size_t>(w)] = next_index++;
          stack.push_back(w);
          on_stack[static_cast<std::size_t>(w)] = true;
          call.push({w, 0});
        } else if (on_stack[static_cast<std::size_t>(w)]) {
          low[static_cast<std::size_t>(fr.v)] =
              std::min(low[static_cast<std::size_t>(fr.v)], index[static_cast<std::size_t>(w)]);
        }
        continue;
      }
      const int v = fr.v;
      call.pop();
      if (!call.empty()) {
        const int parent = call.top().v;
        low[static_cast<std::size_t>(parent)] =
            std::min(low[static_cast<std::size_t>(parent)], low[static_cast<std::size_t>(v)]);
      }
      if (low[static_cast<std::size_t>(v)] == index[static_cast<std::size_t>(v)]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[static_cast<std::size_t>(w)] = false;
          label[static_cast<std::size_t>(w)] = count;
        } while (w != v);
        ++count;
      }
    }
  }
  return label;
}

Vec solve_closed_class(const Mat& q, const std::vector<int>& states, double& residual) {
  const auto m = static_cast<Eigen::Index>(states.size());
  const auto n = q.rows();
  Vec full = Vec::Zero(n);
  if (m == 1) {
    full(states.front()) = 1.0;
    residual = 0.0;
    return full;
  }
  Mat sub(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) sub(i, j) = q(states[static_cast<std::size_t>(i)], states[static_cast<std::size_t>(j)]);
  // pi sub = 0, sum pi = 1: transpose and replace the last equation.
  Mat sys = sub.transpose();
  sys.row(m - 1).setOnes();
  Vec rhs = Vec::Zero(m);
  rhs(m - 1) = 1.0;
  Eigen::FullPivLU<Mat> lu(sys);
  if (lu.rank() < m) throw SolveFailure("stationary_distribution: singular system on a closed class");
  Vec pi = lu.solve(rhs);
  const double scale = std::max(1.0, sub.diagonal().cwiseAbs().maxCoeff());
  residual = (pi.transpose() * sub).cwiseAbs().maxCoeff() / scale;
  if (!(residual <= kStationaryResidualTol))
    throw SolveFailure("stationary_distribution: residual " + std::to_string(residual) +
                       " above tolerance");
  for (Eigen::Index i = 0; i < m; ++i) full(states[static_cast<std::size_t>(i)]) = pi(i);
  return full;
}

}  // namespace

std::vector<CommunicatingClass> communicating_classes(const Mat& q) {
  if (q.rows() != q.cols()) throw InvalidInput("communicating_classes: matrix must be square");
  int count = 0;
  const auto label = scc_labels(q, count);
  std::vector<CommunicatingClass> classes(static_cast<std::size_t>(count));
  for (int i = 0; i < static_cast<int>(label.size()); ++i)
    classes[static_cast<std::size_t>(label[static_cast<std::size_t>(i)])].states.push_back(i);
  for (auto& c : classes) {
    c.closed = true;
    for (int i : c.states)
      for (Eigen::Index j = 0; j < q.cols(); ++j)
        if (j != i && q(i, j) > 0.0 &&
            label[static_cast<std::size_t>(j)] != label[static_cast<std::size_t>(i)])
          c.closed = false;
  }
  std::sort(classes.begin(), classes.end(),
            [](const auto& a, const auto& b) { return a.states.front() < b.states.front(); });
  return classes;
}

const Vec& StationaryResult::unique() const {
  if (stationary.size() != 1) throw SolveFailure("chain has more than one closed class");
  return stationary.front();
}

StationaryResult stationary_distribution(const Mat& q) {
  if (q.rows() != q.cols() || q.rows() == 0) throw InvalidInput("stationary_distribution: bad matrix");
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    const double scale = std::max(1.0, std::abs(q(i, i)));
    if (std::abs(q.row(i).sum()) > 1e-12 * scale)
      throw InvalidInput("stationary_distribution: matrix is not conservative");
  }
  StationaryResult out;
  out.classes = communicating_classes(q);
  out.irreducible = out.classes.size() == 1;
  for (const auto& c : out.classes) {
    if (!c.closed) continue;
    double res = 0.0;
    out.stationary.push_back(solve_closed_class(q, c.states, res));
    out.residual = std::max(out.residual, res);
  }
  return out;
}

}  // namespace ifv
