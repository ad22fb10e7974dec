#include "cgn/diff/ops.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cgn/diff/kernels.hpp"

namespace cgn::diff {

namespace {

Tape& tape_of(Var a, Var b) {
    if (a.tape == nullptr || a.tape != b.tape) throw std::invalid_argument("operands recorded on different tapes");
    return *a.tape;
}

void require_same_shape(const char* op, const Matrix& a, const Matrix& b) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
    }
}

void require_row(const char* op, const Matrix& x, const Matrix& r) {
    if (r.rows != 1 || r.cols != x.cols) {
        throw std::invalid_argument(std::string(op) + ": expected 1x" + std::to_string(x.cols) + " row, got " +
                                    r.shape_str());
    }
}

}  // namespace

Var matmul(Var a, Var b) {
    Tape& t = tape_of(a, b);
    Matrix out = kernels::matmul(a.value(), b.value());
    const std::size_t ia = a.id, ib = b.id;
    return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& tp, const Matrix& g, const Matrix&) {
        if (tp.tracks_grad(ia)) tp.accumulate(ia, kernels::matmul_a_bt(g, tp.value(ib)));
        if (tp.tracks_grad(ib)) tp.accumulate(ib, kernels::matmul_at_b(tp.value(ia), g));
    });
}

Var add(Var a, Var b) {
    Tape& t = tape_of(a, b);
    require_same_shape("add", a.value(), b.value());
    Matrix out = a.value();
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += b.value().data[i];
    const std::size_t ia = a.id, ib = b.id;
    return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& tp, const Matrix& g, const Matrix&) {
        tp.accumulate(ia, g);
        tp.accumulate(ib, g);
    });
}

Var sub(Var a, Var b) {
    Tape& t = tape_of(a, b);
    require_same_shape("sub", a.value(), b.value());
    Matrix out = a.value();
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= b.value().data[i];
    const std::size_t ia = a.id, ib = b.id;
    return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& tp, const Matrix& g, const Matrix&) {
        tp.accumulate(ia, g);
        Matrix neg = g;
        for (double& v : neg.data) v = -v;
        tp.accumulate(ib, neg);
    });
}

Var add_row(Var x, Var r) {
    Tape& t = tape_of(x, r);
    require_row("add_row", x.value(), r.value());
    Matrix out = x.value();
    const Matrix& rv = r.value();
    for (std::size_t i = 0; i < out.rows; ++i) {
        for (std::size_t j = 0; j < out.cols; ++j) out(i, j) += rv(0, j);
    }
    const std::size_t ix = x.id, ir = r.id;
    return t.record(std::move(out), {ix, ir}, [ix, ir](Tape& tp, const Matrix& g, const Matrix&) {
        tp.accumulate(ix, g);
        if (tp.tracks_grad(ir)) {
            Matrix gr(1, g.cols);
            for (std::size_t i = 0; i < g.rows; ++i) {
                for (std::size_t j = 0; j < g.cols; ++j) gr(0, j) += g(i, j);
            }
            tp.accumulate(ir, gr);
        }
    });
}

Var mul_row(Var x, Var r) {
    Tape& t = tape_of(x, r);
    require_row("mul_row", x.value(), r.value());
    Matrix out = x.value();
    const Matrix& rv = r.value();
    for (std::size_t i = 0; i < out.rows; ++i) {
        for (std::size_t j = 0; j < out.cols; ++j) out(i, j) *= rv(0, j);
    }
    const std::size_t ix = x.id, ir = r.id;
    return t.record(std::move(out), {ix, ir}, [ix, ir](Tape& tp, const Matrix& g, const Matrix&) {
        const Matrix& xv = tp.value(ix);
        const Matrix& rv2 = tp.value(ir);
        if (tp.tracks_grad(ix)) {
            Matrix gx = g;
            for (std::size_t i = 0; i < g.rows; ++i) {
                for (std::size_t j = 0; j < g.cols; ++j) gx(i, j) *= rv2(0, j);
            }
            tp.accumulate(ix, gx);
        }
        if (tp.tracks_grad(ir)) {
            Matrix gr(1, g.cols);
            for (std::size_t i = 0; i < g.rows; ++i) {
                for (std::size_t j = 0; j < g.cols; ++j) gr(0, j) += g(i, j) * xv(i, j);
            }
            tp.accumulate(ir, gr);
        }
    });
}

Var mul(Var a, Var b) {
    Tape& t = tape_of(a, b);
    require_same_shape("mul", a.value(), b.value());
    Matrix out = a.value();
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= b.value().data[i];
    const std::size_t ia = a.id, ib = b.id;
    return t.record(std::move(out), {ia, ib}, [ia, ib](Tape& tp, const Matrix& g, const Matrix&) {
        Matrix ga = g, gb = g;
        for (std::size_t i = 0; i < g.data.size(); ++i) {
            ga.data[i] *= tp.value(ib).data[i];
            gb.data[i] *= tp.value(ia).data[i];
        }
        tp.accumulate(ia, ga);
        tp.accumulate(ib, gb);
    });
}

Var scale(Var x, double s) {
    Matrix out = x.value();
    for (double& v : out.data) v *= s;
    const std::size_t ix = x.id;
    return x.tape->record(std::move(out), {ix}, [ix, s](Tape& tp, const Matrix& g, const Matrix&) {
        Matrix gx = g;
        for (double& v : gx.data) v *= s;
        tp.accumulate(ix, gx);
    });
}

Var leaky_relu(Var x, double slope) {
    Matrix out = x.value();
    for (double& v : out.data) v = v > 0.0 ? v : slope * v;
    const std::size_t ix = x.id;
    return x.tape->record(std::move(out), {ix}, [ix, slope](Tape& tp, const Matrix& g, const Matrix&) {
        const Matrix& xv = tp.value(ix);
        Matrix gx = g;
        for (std::size_t i = 0; i < gx.data.size(); ++i) {
            if (xv.data[i] <= 0.0) gx.data[i] *= slope;
        }
        tp.accumulate(ix, gx);
    });
}

Var relu(Var x) { return leaky_relu(x, 0.0); }

Var spmm(std::shared_ptr<const SparseOperator> s, Var x) {
    Matrix out = kernels::spmm(s->forward, x.value());
    const std::size_t ix = x.id;
    return x.tape->record(std::move(out), {ix}, [ix, s](Tape& tp, const Matrix& g, const Matrix&) {
        tp.accumulate(ix, kernels::spmm(s->transpose, g));
    });
}

Var softmax_rows(Var x) {
    const Matrix& xv = x.value();
    Matrix out(xv.rows, xv.cols);
    for (std::size_t i = 0; i < xv.rows; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < xv.cols; ++j) mx = std::max(mx, xv(i, j));
        double z = 0.0;
        for (std::size_t j = 0; j < xv.cols; ++j) {
            out(i, j) = std::exp(xv(i, j) - mx);
            z += out(i, j);
        }
        for (std::size_t j = 0; j < xv.cols; ++j) out(i, j) /= z;
    }
    const std::size_t ix = x.id;
    return x.tape->record(std::move(out), {ix}, [ix](Tape& tp, const Matrix& g, const Matrix& y) {
        Matrix gx(y.rows, y.cols);
        for (std::size_t i = 0; i < y.rows; ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < y.cols; ++j) dot += g(i, j) * y(i, j);
            for (std::size_t j = 0; j < y.cols; ++j) gx(i, j) = y(i, j) * (g(i, j) - dot);
        }
        tp.accumulate(ix, gx);
    });
}

Var log_softmax_rows(Var x) {
    const Matrix& xv = x.value();
    Matrix out(xv.rows, xv.cols);
    for (std::size_t i = 0; i < xv.rows; ++i) {
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < xv.cols; ++j) mx = std::max(mx, xv(i, j));
        double z = 0.0;
        for (std::size_t j = 0; j < xv.cols; ++j) z += std::exp(xv(i, j) - mx);
        const double lse = mx + std::log(z);
        for (std::size_t j = 0; j < xv.cols; ++j) out(i, j) = xv(i, j) - lse;
    }
    const std::size_t ix = x.id;
    return x.tape->record(std::move(out), {ix}, [ix](Tape& tp, const Matrix& g, const Matrix& y) {
        Matrix gx(y.rows, y.cols);
        for (std::size_t i = 0; i < y.rows; ++i) {
            double gs = 0.0;
            for (std::size_t j = 0; j < y.cols; ++j) gs += g(i, j);
            for (std::size_t j = 0; j < y.cols; ++j) gx(i, j) = g(i, j) - std::exp(y(i, j)) * gs;
        }
        tp.accumulate(ix, gx);
    });
}

Var normalize_by_row_max(Var x, double eps) {
    const Matrix& xv = x.value();
    Matrix out(xv.rows, xv.cols);
    std::vector<std::size_t> argmax(xv.rows, 0);
    for (std::size_t i = 0; i < xv.rows; ++i) {
        for (std::size_t j = 1; j < xv.cols; ++j) {
            if (xv(i, j) > xv(i, argmax[i])) argmax[i] = j;
        }
        const double denom = xv(i, argmax[i]) + eps;
        for (std::size_t j = 0; j < xv.cols; ++j) out(i, j) = xv(i, j) / denom;
    }
    const std::size_t ix = x.id;
    return x.tape->record(std::move(out), {ix},
                          [ix, eps, argmax = std::move(argmax)](Tape& tp, const Matrix& g, const Matrix&) {
                              const Matrix& xin = tp.value(ix);
                              Matrix gx(xin.rows, xin.cols);
                              for (std::size_t i = 0; i < xin.rows; ++i) {
                                  const double denom = xin(i, argmax[i]) + eps;
                                  double cross = 0.0;
                                  for (std::size_t j = 0; j < xin.cols; ++j) {
                                      gx(i, j) = g(i, j) / denom;
                                      cross += g(i, j) * xin(i, j);
                                  }
                                  gx(i, argmax[i]) -= cross / (denom * denom);
                              }
                              tp.accumulate(ix, gx);
                          });
}

Var row(Var x, std::size_t i) {
    const Matrix& xv = x.value();
    if (i >= xv.rows) throw std::out_of_range("row: index " + std::to_string(i) + " of " + xv.shape_str());
    Matrix out(1, xv.cols);
    for (std::size_t j = 0; j < xv.cols; ++j) out(0, j) = xv(i, j);
    const std::size_t ix = x.id;
    return x.tape->record(std::move(out), {ix}, [ix, i](Tape& tp, const Matrix& g, const Matrix&) {
        const Matrix& xin = tp.value(ix);
        Matrix gx(xin.rows, xin.cols);
        for (std::size_t j = 0; j < xin.cols; ++j) gx(i, j) = g(0, j);
        tp.accumulate(ix, gx);
    });
}

Var concat_cols(std::span<const Var> parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
    Tape* t = parts.front().tape;
    const std::size_t n = parts.front().rows();
    std::size_t total = 0;
    std::vector<std::size_t> ids, offsets;
    for (const Var& p : parts) {
        if (p.tape != t) throw std::invalid_argument("concat_cols: operands on different tapes");
        if (p.rows() != n) throw std::invalid_argument("concat_cols: row count mismatch");
        ids.push_back(p.id);
        offsets.push_back(total);
        total += p.cols();
    }
    Matrix out(n, total);
    for (std::size_t k = 0; k < parts.size(); ++k) {
        const Matrix& pv = parts[k].value();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < pv.cols; ++j) out(i, offsets[k] + j) = pv(i, j);
        }
    }
    return t->record(std::move(out), ids, [ids, offsets](Tape& tp, const Matrix& g, const Matrix&) {
        for (std::size_t k = 0; k < ids.size(); ++k) {
            if (!tp.tracks_grad(ids[k])) continue;
            const Matrix& pv = tp.value(ids[k]);
            Matrix gp(pv.rows, pv.cols);
            for (std::size_t i = 0; i < pv.rows; ++i) {
                for (std::size_t j = 0; j < pv.cols; ++j) gp(i, j) = g(i, offsets[k] + j);
            }
            tp.accumulate(ids[k], gp);
        }
    });
}

Var sum(Var x) {
    double s = 0.0;
    for (double v : x.value().data) s += v;
    const std::size_t ix = x.id;
    return x.tape->record(Matrix(1, 1, s), {ix}, [ix](Tape& tp, const Matrix& g, const Matrix&) {
        const Matrix& xv = tp.value(ix);
        tp.accumulate(ix, Matrix(xv.rows, xv.cols, g(0, 0)));
    });
}

Var entropy_rows_sum(Var p) {
    double h = 0.0;
    for (double v : p.value().data) {
        if (v <= 0.0) throw std::domain_error("entropy_rows_sum: probabilities must be positive");
        h -= v * std::log(v);
    }
    const std::size_t ip = p.id;
    return p.tape->record(Matrix(1, 1, h), {ip}, [ip](Tape& tp, const Matrix& g, const Matrix&) {
        const Matrix& pv = tp.value(ip);
        Matrix gp(pv.rows, pv.cols);
        for (std::size_t i = 0; i < pv.data.size(); ++i) gp.data[i] = -g(0, 0) * (std::log(pv.data[i]) + 1.0);
        tp.accumulate(ip, gp);
    });
}

Var cross_entropy_mean(Var logits, std::span<const int> labels, const std::vector<bool>& mask) {
    const Matrix& z = logits.value();
    if (labels.size() != z.rows || mask.size() != z.rows) {
        throw std::invalid_argument("cross_entropy_mean: labels/mask length must equal row count " +
                                    std::to_string(z.rows));
    }
    std::size_t count = 0;
    for (bool m : mask) count += m ? 1 : 0;
    if (count == 0) throw std::invalid_argument("cross_entropy_mean: mask selects no rows");

    Matrix prob(z.rows, z.cols);
    double loss = 0.0;
    for (std::size_t i = 0; i < z.rows; ++i) {
        if (!mask[i]) continue;
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= z.cols) {
            throw std::invalid_argument("cross_entropy_mean: label " + std::to_string(y) + " outside [0, " +
                                        std::to_string(z.cols) + ")");
        }
        double mx = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < z.cols; ++j) mx = std::max(mx, z(i, j));
        double s = 0.0;
        for (std::size_t j = 0; j < z.cols; ++j) s += std::exp(z(i, j) - mx);
        const double lse = mx + std::log(s);
        for (std::size_t j = 0; j < z.cols; ++j) prob(i, j) = std::exp(z(i, j) - lse);
        loss += lse - z(i, static_cast<std::size_t>(y));
    }
    loss /= static_cast<double>(count);

    std::vector<int> ys(labels.begin(), labels.end());
    std::vector<bool> ms = mask;
    const std::size_t iz = logits.id;
    return logits.tape->record(
        Matrix(1, 1, loss), {iz},
        [iz, prob = std::move(prob), ys = std::move(ys), ms = std::move(ms), count](Tape& tp, const Matrix& g,
                                                                                    const Matrix&) {
            Matrix gz(prob.rows, prob.cols);
            const double w = g(0, 0) / static_cast<double>(count);
            for (std::size_t i = 0; i < prob.rows; ++i) {
                if (!ms[i]) continue;
                for (std::size_t j = 0; j < prob.cols; ++j) gz(i, j) = w * prob(i, j);
                gz(i, static_cast<std::size_t>(ys[i])) -= w;
            }
            tp.accumulate(iz, gz);
        });
}

Var segment_mean(Var x, std::span<const std::size_t> segment_ids, std::size_t count) {
    const Matrix& xv = x.value();
    if (segment_ids.size() != xv.rows) throw std::invalid_argument("segment_mean: one segment id per row required");
    std::vector<std::size_t> sizes(count, 0);
    for (std::size_t s : segment_ids) {
        if (s >= count) throw std::invalid_argument("segment_mean: segment id " + std::to_string(s) + " >= " +
                                                    std::to_string(count));
        ++sizes[s];
    }
    for (std::size_t s = 0; s < count; ++s) {
        if (sizes[s] == 0) throw std::invalid_argument("segment_mean: segment " + std::to_string(s) + " is empty");
    }
    Matrix out(count, xv.cols);
    for (std::size_t i = 0; i < xv.rows; ++i) {
        for (std::size_t j = 0; j < xv.cols; ++j) out(segment_ids[i], j) += xv(i, j);
    }
    for (std::size_t s = 0; s < count; ++s) {
        for (std::size_t j = 0; j < xv.cols; ++j) out(s, j) /= static_cast<double>(sizes[s]);
    }
    std::vector<std::size_t> ids(segment_ids.begin(), segment_ids.end());
    const std::size_t ix = x.id;
    return x.tape->record(std::move(out), {ix},
                          [ix, ids = std::move(ids), sizes = std::move(sizes)](Tape& tp, const Matrix& g,
                                                                               const Matrix&) {
                              Matrix gx(ids.size(), g.cols);
                              for (std::size_t i = 0; i < ids.size(); ++i) {
                                  const double w = 1.0 / static_cast<double>(sizes[ids[i]]);
                                  for (std::size_t j = 0; j < g.cols; ++j) gx(i, j) = w * g(ids[i], j);
                              }
                              tp.accumulate(ix, gx);
                          });
}

}  // namespace cgn::diff
