#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tactictraj/params.hpp"
#include "tactictraj/tensor.hpp"

namespace tactictraj {

/// Handle to a node on a Graph tape.
struct Var {
    std::int32_t id = -1;
    bool valid() const { return id >= 0; }
};

/// Reverse-mode autodiff over a recorded tape of tensor operations.
///
/// Nodes are appended in evaluation order; backward() walks the tape in
/// reverse, accumulating gradients into node slots and finally into the
/// ParamStore gradients of parameter leaves. One Graph per training step;
/// forward-only use (inference) simply never calls backward().
class Graph {
public:
    Var input(Tensor value) { return push(std::move(value), {}, nullptr); }

    /// Parameter leaf tied to a ParamStore entry; deduplicated per store+name.
    Var param(ParamStore& store, const std::string& name) {
        const std::string key = name;
        auto it = param_vars_.find(key);
        if (it != param_vars_.end()) return it->second;
        Var v = push(store.param(name), {}, nullptr);
        nodes_[v.id].store = &store;
        nodes_[v.id].pname = name;
        param_vars_.emplace(key, v);
        return v;
    }

    const Tensor& value(Var v) const { return nodes_[v.id].value; }

    std::size_t size() const { return nodes_.size(); }

    // ---- arithmetic -------------------------------------------------------

    Var matmul(Var a, Var b) {
        Tensor out = tactictraj::matmul(val(a), val(b));
        return push(std::move(out), {a, b}, [](Graph& g, Node& n) {
            const Tensor& go = n.grad;
            const Tensor& av = g.val(n.parents[0]);
            const Tensor& bv = g.val(n.parents[1]);
            g.accum(n.parents[0], tactictraj::matmul(go, tactictraj::transpose(bv)));
            g.accum(n.parents[1], tactictraj::matmul(tactictraj::transpose(av), go));
        });
    }

    Var add(Var a, Var b) {
        Tensor out = tactictraj::add(val(a), val(b));
        return push(std::move(out), {a, b}, [](Graph& g, Node& n) {
            g.accum(n.parents[0], n.grad);
            g.accum(n.parents[1], n.grad);
        });
    }

    Var sub(Var a, Var b) {
        Tensor out = tactictraj::sub(val(a), val(b));
        return push(std::move(out), {a, b}, [](Graph& g, Node& n) {
            g.accum(n.parents[0], n.grad);
            g.accum(n.parents[1], tactictraj::scale(n.grad, -1.0));
        });
    }

    Var hadamard(Var a, Var b) {
        const Tensor& av = val(a);
        const Tensor& bv = val(b);
        if (!av.same_shape(bv)) {
            throw ShapeError("hadamard shape mismatch " + Tensor::shape_string(av.shape()) +
                             " vs " + Tensor::shape_string(bv.shape()));
        }
        Tensor out = av;
        for (std::size_t i = 0; i < out.numel(); ++i) out[i] *= bv[i];
        return push(std::move(out), {a, b}, [](Graph& g, Node& n) {
            const Tensor& av2 = g.val(n.parents[0]);
            const Tensor& bv2 = g.val(n.parents[1]);
            Tensor ga = n.grad, gb = n.grad;
            for (std::size_t i = 0; i < ga.numel(); ++i) {
                ga[i] *= bv2[i];
                gb[i] *= av2[i];
            }
            g.accum(n.parents[0], ga);
            g.accum(n.parents[1], gb);
        });
    }

    Var scale(Var a, double c) {
        return push(tactictraj::scale(val(a), c), {a}, [c](Graph& g, Node& n) {
            g.accum(n.parents[0], tactictraj::scale(n.grad, c));
        });
    }

    Var add_scalar(Var a, double c) {
        Tensor out = val(a);
        for (double& v : out.data()) v += c;
        return push(std::move(out), {a},
                    [](Graph& g, Node& n) { g.accum(n.parents[0], n.grad); });
    }

    /// Broadcast-add a 1 x n row vector to every row of an m x n matrix.
    Var add_rowvec(Var a, Var b) {
        const Tensor& av = val(a);
        const Tensor& bv = val(b);
        if (bv.rows() != 1 || bv.cols() != av.cols()) {
            throw ShapeError("add_rowvec shape mismatch " + Tensor::shape_string(av.shape()) +
                             " vs " + Tensor::shape_string(bv.shape()));
        }
        Tensor out = av;
        for (std::size_t i = 0; i < av.rows(); ++i)
            for (std::size_t j = 0; j < av.cols(); ++j) out.at(i, j) += bv.at(0, j);
        return push(std::move(out), {a, b}, [](Graph& g, Node& n) {
            g.accum(n.parents[0], n.grad);
            Tensor gb({1, n.grad.cols()});
            for (std::size_t i = 0; i < n.grad.rows(); ++i)
                for (std::size_t j = 0; j < n.grad.cols(); ++j) gb.at(0, j) += n.grad.at(i, j);
            g.accum(n.parents[1], gb);
        });
    }

    /// out[i,j] = a[i,0] + b[j,0] for column vectors a (m x 1), b (n x 1).
    Var outer_sum(Var a, Var b) {
        const Tensor& av = val(a);
        const Tensor& bv = val(b);
        if (av.cols() != 1 || bv.cols() != 1) {
            throw ShapeError("outer_sum expects column vectors, got " +
                             Tensor::shape_string(av.shape()) + " and " +
                             Tensor::shape_string(bv.shape()));
        }
        Tensor out({av.rows(), bv.rows()});
        for (std::size_t i = 0; i < av.rows(); ++i)
            for (std::size_t j = 0; j < bv.rows(); ++j) out.at(i, j) = av.at(i, 0) + bv.at(j, 0);
        return push(std::move(out), {a, b}, [](Graph& g, Node& n) {
            Tensor ga({n.grad.rows(), 1}), gb({n.grad.cols(), 1});
            for (std::size_t i = 0; i < n.grad.rows(); ++i)
                for (std::size_t j = 0; j < n.grad.cols(); ++j) {
                    ga.at(i, 0) += n.grad.at(i, j);
                    gb.at(j, 0) += n.grad.at(i, j);
                }
            g.accum(n.parents[0], ga);
            g.accum(n.parents[1], gb);
        });
    }

    /// Scale each row i of a (m x n) by v[i,0] from a column vector (m x 1).
    Var mul_colvec(Var a, Var v) {
        const Tensor& av = val(a);
        const Tensor& vv = val(v);
        if (vv.cols() != 1 || vv.rows() != av.rows()) {
            throw ShapeError("mul_colvec shape mismatch " + Tensor::shape_string(av.shape()) +
                             " vs " + Tensor::shape_string(vv.shape()));
        }
        Tensor out = av;
        for (std::size_t i = 0; i < av.rows(); ++i)
            for (std::size_t j = 0; j < av.cols(); ++j) out.at(i, j) *= vv.at(i, 0);
        return push(std::move(out), {a, v}, [](Graph& g, Node& n) {
            const Tensor& av2 = g.val(n.parents[0]);
            const Tensor& vv2 = g.val(n.parents[1]);
            Tensor ga = n.grad;
            Tensor gv({vv2.rows(), 1});
            for (std::size_t i = 0; i < av2.rows(); ++i)
                for (std::size_t j = 0; j < av2.cols(); ++j) {
                    gv.at(i, 0) += n.grad.at(i, j) * av2.at(i, j);
                    ga.at(i, j) *= vv2.at(i, 0);
                }
            g.accum(n.parents[0], ga);
            g.accum(n.parents[1], gv);
        });
    }

    /// Multiply every entry of a by a 1x1 scalar variable s.
    Var scale_by(Var a, Var s) {
        const Tensor& sv = val(s);
        if (sv.numel() != 1) throw ShapeError("scale_by expects a 1x1 scalar variable");
        Tensor out = tactictraj::scale(val(a), sv[0]);
        return push(std::move(out), {a, s}, [](Graph& g, Node& n) {
            const Tensor& av = g.val(n.parents[0]);
            const double s0 = g.val(n.parents[1])[0];
            g.accum(n.parents[0], tactictraj::scale(n.grad, s0));
            double ds = 0.0;
            for (std::size_t i = 0; i < av.numel(); ++i) ds += n.grad[i] * av[i];
            g.accum(n.parents[1], Tensor::scalar(ds));
        });
    }

    // ---- nonlinearities ---------------------------------------------------

    Var relu(Var a) { return leaky_relu(a, 0.0); }

    Var leaky_relu(Var a, double slope) {
        Tensor out = val(a);
        for (double& v : out.data())
            if (v < 0.0) v *= slope;
        return push(std::move(out), {a}, [slope](Graph& g, Node& n) {
            const Tensor& av = g.val(n.parents[0]);
            Tensor ga = n.grad;
            for (std::size_t i = 0; i < ga.numel(); ++i)
                if (av[i] < 0.0) ga[i] *= slope;
            g.accum(n.parents[0], ga);
        });
    }

    Var softmax_rows(Var a) {
        Tensor out = tactictraj::softmax_rows(val(a));
        return push(std::move(out), {a}, [](Graph& g, Node& n) {
            const Tensor& y = n.value;
            Tensor ga({y.rows(), y.cols()});
            for (std::size_t i = 0; i < y.rows(); ++i) {
                double dot = 0.0;
                for (std::size_t j = 0; j < y.cols(); ++j) dot += n.grad.at(i, j) * y.at(i, j);
                for (std::size_t j = 0; j < y.cols(); ++j)
                    ga.at(i, j) = (n.grad.at(i, j) - dot) * y.at(i, j);
            }
            g.accum(n.parents[0], ga);
        });
    }

    Var log(Var a) {
        Tensor out = val(a);
        for (double& v : out.data()) v = std::log(v);
        return push(std::move(out), {a}, [](Graph& g, Node& n) {
            const Tensor& av = g.val(n.parents[0]);
            Tensor ga = n.grad;
            for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] /= av[i];
            g.accum(n.parents[0], ga);
        });
    }

    Var exp(Var a) {
        Tensor out = val(a);
        for (double& v : out.data()) v = std::exp(v);
        return push(std::move(out), {a}, [](Graph& g, Node& n) {
            Tensor ga = n.grad;
            for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] *= n.value[i];
            g.accum(n.parents[0], ga);
        });
    }

    Var square(Var a) {
        Tensor out = val(a);
        for (double& v : out.data()) v *= v;
        return push(std::move(out), {a}, [](Graph& g, Node& n) {
            const Tensor& av = g.val(n.parents[0]);
            Tensor ga = n.grad;
            for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] *= 2.0 * av[i];
            g.accum(n.parents[0], ga);
        });
    }

    Var sqrt(Var a) {
        Tensor out = val(a);
        for (double& v : out.data()) v = std::sqrt(v);
        return push(std::move(out), {a}, [](Graph& g, Node& n) {
            Tensor ga = n.grad;
            for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] *= 0.5 / n.value[i];
            g.accum(n.parents[0], ga);
        });
    }

    Var pow_const(Var a, double p) {
        Tensor out = val(a);
        for (double& v : out.data()) v = std::pow(v, p);
        return push(std::move(out), {a}, [p](Graph& g, Node& n) {
            const Tensor& av = g.val(n.parents[0]);
            Tensor ga = n.grad;
            for (std::size_t i = 0; i < ga.numel(); ++i) ga[i] *= p * std::pow(av[i], p - 1.0);
            g.accum(n.parents[0], ga);
        });
    }

    /// max(a, lo); zero subgradient on the clamped region.
    Var clamp_min(Var a, double lo) {
        Tensor out = val(a);
        for (double& v : out.data()) v = std::max(v, lo);
        return push(std::move(out), {a}, [lo](Graph& g, Node& n) {
            const Tensor& av = g.val(n.parents[0]);
            Tensor ga = n.grad;
            for (std::size_t i = 0; i < ga.numel(); ++i)
                if (av[i] <= lo) ga[i] = 0.0;
            g.accum(n.parents[0], ga);
        });
    }

    // ---- reductions / reshaping -------------------------------------------

    Var sum_all(Var a) {
        Tensor out = Tensor::scalar(tactictraj::sum_all(val(a)));
        return push(std::move(out), {a}, [](Graph& g, Node& n) {
            const Tensor& av = g.val(n.parents[0]);
            g.accum(n.parents[0], Tensor::full(av.shape(), n.grad[0]));
        });
    }

    Var mean_all(Var a) {
        const double inv = 1.0 / static_cast<double>(val(a).numel());
        return scale(sum_all(a), inv);
    }

    /// m x n -> 1 x n column means over rows.
    Var mean_rows(Var a) {
        const Tensor& av = val(a);
        Tensor out({1, av.cols()});
        for (std::size_t i = 0; i < av.rows(); ++i)
            for (std::size_t j = 0; j < av.cols(); ++j) out.at(0, j) += av.at(i, j);
        const double inv = 1.0 / static_cast<double>(av.rows());
        for (double& v : out.data()) v *= inv;
        return push(std::move(out), {a}, [inv](Graph& g, Node& n) {
            const Tensor& av2 = g.val(n.parents[0]);
            Tensor ga({av2.rows(), av2.cols()});
            for (std::size_t i = 0; i < av2.rows(); ++i)
                for (std::size_t j = 0; j < av2.cols(); ++j) ga.at(i, j) = n.grad.at(0, j) * inv;
            g.accum(n.parents[0], ga);
        });
    }

    /// m x n -> m x 1 row sums.
    Var sum_cols(Var a) {
        const Tensor& av = val(a);
        Tensor out({av.rows(), 1});
        for (std::size_t i = 0; i < av.rows(); ++i)
            for (std::size_t j = 0; j < av.cols(); ++j) out.at(i, 0) += av.at(i, j);
        return push(std::move(out), {a}, [](Graph& g, Node& n) {
            const Tensor& av2 = g.val(n.parents[0]);
            Tensor ga({av2.rows(), av2.cols()});
            for (std::size_t i = 0; i < av2.rows(); ++i)
                for (std::size_t j = 0; j < av2.cols(); ++j) ga.at(i, j) = n.grad.at(i, 0);
            g.accum(n.parents[0], ga);
        });
    }

    Var transpose(Var a) {
        return push(tactictraj::transpose(val(a)), {a}, [](Graph& g, Node& n) {
            g.accum(n.parents[0], tactictraj::transpose(n.grad));
        });
    }

    Var reshape(Var a, std::vector<std::size_t> shape) {
        Tensor out = val(a).reshaped(shape);
        return push(std::move(out), {a}, [](Graph& g, Node& n) {
            const Tensor& av = g.val(n.parents[0]);
            g.accum(n.parents[0], n.grad.reshaped(av.shape()));
        });
    }

    Var concat_cols(Var a, Var b) {
        const Tensor& av = val(a);
        const Tensor& bv = val(b);
        if (av.rows() != bv.rows()) {
            throw ShapeError("concat_cols row mismatch " + Tensor::shape_string(av.shape()) +
                             " vs " + Tensor::shape_string(bv.shape()));
        }
        Tensor out({av.rows(), av.cols() + bv.cols()});
        for (std::size_t i = 0; i < av.rows(); ++i) {
            for (std::size_t j = 0; j < av.cols(); ++j) out.at(i, j) = av.at(i, j);
            for (std::size_t j = 0; j < bv.cols(); ++j) out.at(i, av.cols() + j) = bv.at(i, j);
        }
        const std::size_t ac = av.cols();
        return push(std::move(out), {a, b}, [ac](Graph& g, Node& n) {
            const Tensor& go = n.grad;
            Tensor ga({go.rows(), ac}), gb({go.rows(), go.cols() - ac});
            for (std::size_t i = 0; i < go.rows(); ++i) {
                for (std::size_t j = 0; j < ac; ++j) ga.at(i, j) = go.at(i, j);
                for (std::size_t j = ac; j < go.cols(); ++j) gb.at(i, j - ac) = go.at(i, j);
            }
            g.accum(n.parents[0], ga);
            g.accum(n.parents[1], gb);
        });
    }

    Var concat_rows(const std::vector<Var>& parts) {
        if (parts.empty()) throw ShapeError("concat_rows of empty list");
        std::size_t total = 0;
        const std::size_t ncols = val(parts[0]).cols();
        for (Var p : parts) {
            if (val(p).cols() != ncols) throw ShapeError("concat_rows column mismatch");
            total += val(p).rows();
        }
        Tensor out({total, ncols});
        std::size_t r = 0;
        std::vector<std::size_t> row_offsets;
        for (Var p : parts) {
            row_offsets.push_back(r);
            const Tensor& pv = val(p);
            for (std::size_t i = 0; i < pv.rows(); ++i)
                for (std::size_t j = 0; j < ncols; ++j) out.at(r + i, j) = pv.at(i, j);
            r += pv.rows();
        }
        Var v = push(std::move(out), parts, [row_offsets](Graph& g, Node& n) {
            for (std::size_t p = 0; p < n.parents.size(); ++p) {
                const Tensor& pv = g.val(n.parents[p]);
                Tensor gp({pv.rows(), pv.cols()});
                for (std::size_t i = 0; i < pv.rows(); ++i)
                    for (std::size_t j = 0; j < pv.cols(); ++j)
                        gp.at(i, j) = n.grad.at(row_offsets[p] + i, j);
                g.accum(n.parents[p], gp);
            }
        });
        return v;
    }

    Var slice_cols(Var a, std::size_t c0, std::size_t c1) {
        const Tensor& av = val(a);
        if (c0 >= c1 || c1 > av.cols()) {
            throw ShapeError("slice_cols range [" + std::to_string(c0) + "," + std::to_string(c1) +
                             ") out of " + Tensor::shape_string(av.shape()));
        }
        Tensor out({av.rows(), c1 - c0});
        for (std::size_t i = 0; i < av.rows(); ++i)
            for (std::size_t j = c0; j < c1; ++j) out.at(i, j - c0) = av.at(i, j);
        return push(std::move(out), {a}, [c0](Graph& g, Node& n) {
            const Tensor& av2 = g.val(n.parents[0]);
            Tensor ga({av2.rows(), av2.cols()});
            for (std::size_t i = 0; i < n.grad.rows(); ++i)
                for (std::size_t j = 0; j < n.grad.cols(); ++j) ga.at(i, c0 + j) = n.grad.at(i, j);
            g.accum(n.parents[0], ga);
        });
    }

    Var slice_rows(Var a, std::size_t r0, std::size_t r1) {
        const Tensor& av = val(a);
        if (r0 >= r1 || r1 > av.rows()) {
            throw ShapeError("slice_rows range [" + std::to_string(r0) + "," + std::to_string(r1) +
                             ") out of " + Tensor::shape_string(av.shape()));
        }
        Tensor out({r1 - r0, av.cols()});
        for (std::size_t i = r0; i < r1; ++i)
            for (std::size_t j = 0; j < av.cols(); ++j) out.at(i - r0, j) = av.at(i, j);
        return push(std::move(out), {a}, [r0](Graph& g, Node& n) {
            const Tensor& av2 = g.val(n.parents[0]);
            Tensor ga({av2.rows(), av2.cols()});
            for (std::size_t i = 0; i < n.grad.rows(); ++i)
                for (std::size_t j = 0; j < n.grad.cols(); ++j) ga.at(r0 + i, j) = n.grad.at(i, j);
            g.accum(n.parents[0], ga);
        });
    }

    /// Row gather (embedding lookup); duplicate indices accumulate gradient.
    Var gather_rows(Var a, std::vector<std::size_t> idx) {
        const Tensor& av = val(a);
        Tensor out({idx.size(), av.cols()});
        for (std::size_t i = 0; i < idx.size(); ++i) {
            if (idx[i] >= av.rows()) {
                throw ShapeError("gather_rows index " + std::to_string(idx[i]) + " out of " +
                                 Tensor::shape_string(av.shape()));
            }
            for (std::size_t j = 0; j < av.cols(); ++j) out.at(i, j) = av.at(idx[i], j);
        }
        return push(std::move(out), {a}, [idx](Graph& g, Node& n) {
            const Tensor& av2 = g.val(n.parents[0]);
            Tensor ga({av2.rows(), av2.cols()});
            for (std::size_t i = 0; i < idx.size(); ++i)
                for (std::size_t j = 0; j < av2.cols(); ++j)
                    ga.at(idx[i], j) += n.grad.at(i, j);
            g.accum(n.parents[0], ga);
        });
    }

    /// Per-row layer norm with learnable gain/bias (1 x n each).
    Var layer_norm_rows(Var x, Var gain, Var bias, double eps = 1e-6) {
        const Tensor& xv = val(x);
        const std::size_t m = xv.rows(), ncol = xv.cols();
        Tensor norm({m, ncol});
        std::vector<double> inv_stds(m);
        for (std::size_t i = 0; i < m; ++i) {
            double mu = 0.0;
            for (std::size_t j = 0; j < ncol; ++j) mu += xv.at(i, j);
            mu /= static_cast<double>(ncol);
            double var = 0.0;
            for (std::size_t j = 0; j < ncol; ++j) {
                const double d = xv.at(i, j) - mu;
                var += d * d;
            }
            var /= static_cast<double>(ncol);
            const double inv_std = 1.0 / std::sqrt(var + eps);
            inv_stds[i] = inv_std;
            for (std::size_t j = 0; j < ncol; ++j) norm.at(i, j) = (xv.at(i, j) - mu) * inv_std;
        }
        Var nvar = push(std::move(norm), {x}, [inv_stds](Graph& g, Node& n) {
            // d/dx of (x - mu) * inv_std with mu, sigma functions of the row.
            const Tensor& y = n.value;
            const std::size_t m2 = y.rows(), nc = y.cols();
            Tensor ga({m2, nc});
            for (std::size_t i = 0; i < m2; ++i) {
                double gsum = 0.0, gysum = 0.0;
                for (std::size_t j = 0; j < nc; ++j) {
                    gsum += n.grad.at(i, j);
                    gysum += n.grad.at(i, j) * y.at(i, j);
                }
                const double invn = 1.0 / static_cast<double>(nc);
                for (std::size_t j = 0; j < nc; ++j) {
                    ga.at(i, j) = inv_stds[i] *
                                  (n.grad.at(i, j) - gsum * invn - y.at(i, j) * gysum * invn);
                }
            }
            g.accum(n.parents[0], ga);
        });
        // y = norm * gain + bias, broadcast over rows.
        const Tensor& gv = val(gain);
        if (gv.rows() != 1 || gv.cols() != ncol) {
            throw ShapeError("layer_norm gain shape " + Tensor::shape_string(gv.shape()) +
                             " does not match feature width " + std::to_string(ncol));
        }
        Var scaled = push(
            [&] {
                Tensor out = val(nvar);
                for (std::size_t i = 0; i < m; ++i)
                    for (std::size_t j = 0; j < ncol; ++j) out.at(i, j) *= gv.at(0, j);
                return out;
            }(),
            {nvar, gain}, [](Graph& g, Node& n) {
                const Tensor& nv = g.val(n.parents[0]);
                const Tensor& gv2 = g.val(n.parents[1]);
                Tensor gn = n.grad;
                Tensor gg({1, gv2.cols()});
                for (std::size_t i = 0; i < nv.rows(); ++i)
                    for (std::size_t j = 0; j < nv.cols(); ++j) {
                        gg.at(0, j) += n.grad.at(i, j) * nv.at(i, j);
                        gn.at(i, j) *= gv2.at(0, j);
                    }
                g.accum(n.parents[0], gn);
                g.accum(n.parents[1], gg);
            });
        return add_rowvec(scaled, bias);
    }

    // ---- backward ---------------------------------------------------------

    /// Backpropagate from a scalar loss; accumulates into ParamStore grads.
    void backward(Var loss) {
        if (!loss.valid() || val(loss).numel() != 1) {
            throw ArgumentError("backward requires a scalar loss node");
        }
        for (auto& n : nodes_) {
            n.grad = Tensor();
            n.has_grad = false;
        }
        nodes_[loss.id].grad = Tensor::full(val(loss).shape(), 1.0);
        nodes_[loss.id].has_grad = true;
        for (std::int32_t i = loss.id; i >= 0; --i) {
            Node& n = nodes_[i];
            if (!n.has_grad) continue;
            if (n.back) n.back(*this, n);
            if (n.store) n.store->accumulate_grad(n.pname, n.grad);
        }
    }

private:
    struct Node {
        Tensor value;
        Tensor grad;
        bool has_grad = false;
        std::vector<Var> parents;
        std::function<void(Graph&, Node&)> back;
        ParamStore* store = nullptr;
        std::string pname;
    };

    const Tensor& val(Var v) const { return nodes_[v.id].value; }

    void accum(Var v, const Tensor& g) {
        Node& n = nodes_[v.id];
        if (!n.has_grad) {
            n.grad = g;
            n.has_grad = true;
            return;
        }
        for (std::size_t i = 0; i < n.grad.numel(); ++i) n.grad[i] += g[i];
    }

    Var push(Tensor value, std::vector<Var> parents, std::function<void(Graph&, Node&)> back) {
        Node n;
        n.value = std::move(value);
        n.parents = std::move(parents);
        n.back = std::move(back);
        nodes_.push_back(std::move(n));
        return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
    }

    std::vector<Node> nodes_;
    std::unordered_map<std::string, Var> param_vars_;
};

}  // namespace tactictraj
