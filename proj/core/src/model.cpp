#include "cinecam/model.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "cinecam/error.hpp"
#include "cinecam/parallel.hpp"

namespace cinecam {

namespace {

constexpr double kLnEps = 1e-5;
constexpr double kProbFloor = 1e-12;

struct BlockOffsets {
    std::size_t ln1_g, ln1_b, qkv_w, qkv_b, proj_w, proj_b;
    std::size_t ln2_g, ln2_b, fc_w, fc_b, out_w, out_b;
};

struct ParamLayout {
    int V, D, C, H, B, F, dh;
    std::size_t wte, wpe;
    std::vector<BlockOffsets> blocks;
    std::size_t lnf_g, lnf_b, head_w, head_b;
    std::size_t total;
};

ParamLayout layout_of(const ModelDesc& d) {
    ParamLayout l;
    l.V = d.vocab;
    l.D = d.width;
    l.C = d.context;
    l.H = d.heads;
    l.B = d.blocks;
    l.F = 4 * d.width;
    l.dh = d.width / d.heads;
    std::size_t off = 0;
    auto take = [&](std::size_t n) {
        const std::size_t o = off;
        off += n;
        return o;
    };
    const auto V = static_cast<std::size_t>(l.V), D = static_cast<std::size_t>(l.D),
               C = static_cast<std::size_t>(l.C), F = static_cast<std::size_t>(l.F);
    l.wte = take(V * D);
    l.wpe = take(C * D);
    l.blocks.resize(static_cast<std::size_t>(l.B));
    for (BlockOffsets& b : l.blocks) {
        b.ln1_g = take(D);
        b.ln1_b = take(D);
        b.qkv_w = take(D * 3 * D);
        b.qkv_b = take(3 * D);
        b.proj_w = take(D * D);
        b.proj_b = take(D);
        b.ln2_g = take(D);
        b.ln2_b = take(D);
        b.fc_w = take(D * F);
        b.fc_b = take(F);
        b.out_w = take(F * D);
        b.out_b = take(D);
    }
    l.lnf_g = take(D);
    l.lnf_b = take(D);
    l.head_w = take(D * V);
    l.head_b = take(V);
    l.total = off;
    return l;
}

template <typename S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <typename S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <typename S>
using Arr = Eigen::Array<S, Eigen::Dynamic, 1>;
template <typename S>
using CMap = Eigen::Map<const Mat<S>>;
template <typename S>
using MMap = Eigen::Map<Mat<S>>;
template <typename S>
using CVMap = Eigen::Map<const Vec<S>>;
template <typename S>
using MVMap = Eigen::Map<Vec<S>>;

template <typename S>
S gelu_val(S x) {
    return S(0.5) * x * (S(1) + std::erf(x * S(0.7071067811865475)));
}

template <typename S>
S gelu_grad(S x) {
    const S cdf = S(0.5) * (S(1) + std::erf(x * S(0.7071067811865475)));
    const S pdf = S(0.3989422804014327) * std::exp(S(-0.5) * x * x);
    return cdf + x * pdf;
}

/// y = (x - mean)/sqrt(var + eps) * g + b per row; mean/rstd kept for backward.
template <typename S>
void layer_norm(const Mat<S>& x, CVMap<S> g, CVMap<S> b, Mat<S>& y, Vec<S>& mean,
                Vec<S>& rstd) {
    const Eigen::Index L = x.rows(), D = x.cols();
    y.resize(L, D);
    mean.resize(L);
    rstd.resize(L);
    for (Eigen::Index i = 0; i < L; ++i) {
        const S m = x.row(i).mean();
        const S var = (x.row(i).array() - m).square().sum() / S(D);
        const S r = S(1) / std::sqrt(var + S(kLnEps));
        mean[i] = m;
        rstd[i] = r;
        y.row(i) = (((x.row(i).array() - m) * r) * g.transpose().array() +
                    b.transpose().array())
                       .matrix();
    }
}

/// Accumulates dx (+=), dg (+=), db (+=) given upstream dy.
template <typename S>
void layer_norm_backward(const Mat<S>& x, const Vec<S>& mean, const Vec<S>& rstd, CVMap<S> g,
                         const Mat<S>& dy, Mat<S>& dx, MVMap<S> dg, MVMap<S> db) {
    const Eigen::Index L = x.rows();
    for (Eigen::Index i = 0; i < L; ++i) {
        const Arr<S> xhat = (x.row(i).transpose().array() - mean[i]) * rstd[i];
        const Arr<S> dyr = dy.row(i).transpose().array();
        dg.array() += dyr * xhat;
        db.array() += dyr;
        const Arr<S> dxhat = dyr * g.array();
        const S m1 = dxhat.mean();
        const S m2 = (dxhat * xhat).mean();
        dx.row(i) += (rstd[i] * (dxhat - m1 - xhat * m2)).matrix().transpose();
    }
}

template <typename S>
struct BlockActs {
    Mat<S> x_in, ln1, qkv, att, x_mid, ln2, fc_pre, fc_act;
    Vec<S> ln1_mean, ln1_rstd, ln2_mean, ln2_rstd;
    std::vector<Mat<S>> probs;
};

template <typename S>
struct Acts {
    std::vector<BlockActs<S>> blocks;
    Mat<S> x_final, lnf, logits;
    Vec<S> lnf_mean, lnf_rstd;
};

template <typename S>
void forward_full(const ParamLayout& pl, const S* p, const std::vector<int>& tokens,
                  Acts<S>& a) {
    const Eigen::Index L = static_cast<Eigen::Index>(tokens.size());
    const int D = pl.D;
    CMap<S> wte(p + pl.wte, pl.V, D);
    CMap<S> wpe(p + pl.wpe, pl.C, D);

    Mat<S> x(L, D);
    for (Eigen::Index i = 0; i < L; ++i)
        x.row(i) = wte.row(tokens[static_cast<std::size_t>(i)]) + wpe.row(i);

    a.blocks.resize(static_cast<std::size_t>(pl.B));
    const S inv_sqrt_dh = S(1) / std::sqrt(S(pl.dh));
    for (int b = 0; b < pl.B; ++b) {
        BlockActs<S>& ba = a.blocks[static_cast<std::size_t>(b)];
        const BlockOffsets& bo = pl.blocks[static_cast<std::size_t>(b)];
        ba.x_in = std::move(x);

        layer_norm<S>(ba.x_in, CVMap<S>(p + bo.ln1_g, D), CVMap<S>(p + bo.ln1_b, D), ba.ln1,
                      ba.ln1_mean, ba.ln1_rstd);
        ba.qkv.noalias() = ba.ln1 * CMap<S>(p + bo.qkv_w, D, 3 * D);
        ba.qkv.rowwise() += CVMap<S>(p + bo.qkv_b, 3 * D).transpose();

        ba.att.resize(L, D);
        ba.probs.resize(static_cast<std::size_t>(pl.H));
        for (int h = 0; h < pl.H; ++h) {
            auto Q = ba.qkv.block(0, h * pl.dh, L, pl.dh);
            auto K = ba.qkv.block(0, D + h * pl.dh, L, pl.dh);
            auto V = ba.qkv.block(0, 2 * D + h * pl.dh, L, pl.dh);
            Mat<S>& P = ba.probs[static_cast<std::size_t>(h)];
            P.noalias() = Q * K.transpose();
            P *= inv_sqrt_dh;
            for (Eigen::Index i = 0; i < L; ++i) {
                auto row = P.row(i).head(i + 1);
                const S mx = row.maxCoeff();
                row = (row.array() - mx).exp().matrix();
                row /= row.sum();
                if (i + 1 < L) P.row(i).tail(L - i - 1).setZero();
            }
            ba.att.block(0, h * pl.dh, L, pl.dh).noalias() = P * V;
        }
        ba.x_mid.noalias() = ba.att * CMap<S>(p + bo.proj_w, D, D);
        ba.x_mid.rowwise() += CVMap<S>(p + bo.proj_b, D).transpose();
        ba.x_mid += ba.x_in;

        layer_norm<S>(ba.x_mid, CVMap<S>(p + bo.ln2_g, D), CVMap<S>(p + bo.ln2_b, D), ba.ln2,
                      ba.ln2_mean, ba.ln2_rstd);
        ba.fc_pre.noalias() = ba.ln2 * CMap<S>(p + bo.fc_w, D, pl.F);
        ba.fc_pre.rowwise() += CVMap<S>(p + bo.fc_b, pl.F).transpose();
        ba.fc_act = ba.fc_pre.unaryExpr([](S v) { return gelu_val(v); });
        x.noalias() = ba.fc_act * CMap<S>(p + bo.out_w, pl.F, D);
        x.rowwise() += CVMap<S>(p + bo.out_b, D).transpose();
        x += ba.x_mid;
    }
    a.x_final = std::move(x);
    layer_norm<S>(a.x_final, CVMap<S>(p + pl.lnf_g, D), CVMap<S>(p + pl.lnf_b, D), a.lnf,
                  a.lnf_mean, a.lnf_rstd);
    a.logits.noalias() = a.lnf * CMap<S>(p + pl.head_w, D, pl.V);
    a.logits.rowwise() += CVMap<S>(p + pl.head_b, pl.V).transpose();
}

template <typename S>
void backward_full(const ParamLayout& pl, const S* p, const std::vector<int>& tokens,
                   const Acts<S>& a, const Mat<S>& dlogits, S* g) {
    const Eigen::Index L = static_cast<Eigen::Index>(tokens.size());
    const int D = pl.D;

    {
        MMap<S> dhead_w(g + pl.head_w, D, pl.V);
        dhead_w.noalias() += a.lnf.transpose() * dlogits;
        MVMap<S> dhead_b(g + pl.head_b, pl.V);
        dhead_b += dlogits.colwise().sum().transpose();
    }
    Mat<S> dlnf(L, D);
    dlnf.noalias() = dlogits * CMap<S>(p + pl.head_w, D, pl.V).transpose();

    Mat<S> dx = Mat<S>::Zero(L, D);
    {
        MVMap<S> dg(g + pl.lnf_g, D), db(g + pl.lnf_b, D);
        layer_norm_backward<S>(a.x_final, a.lnf_mean, a.lnf_rstd, CVMap<S>(p + pl.lnf_g, D),
                               dlnf, dx, dg, db);
    }

    const S inv_sqrt_dh = S(1) / std::sqrt(S(pl.dh));
    for (int b = pl.B - 1; b >= 0; --b) {
        const BlockActs<S>& ba = a.blocks[static_cast<std::size_t>(b)];
        const BlockOffsets& bo = pl.blocks[static_cast<std::size_t>(b)];

        // mlp branch
        {
            MMap<S> dout_w(g + bo.out_w, pl.F, D);
            dout_w.noalias() += ba.fc_act.transpose() * dx;
            MVMap<S> dout_b(g + bo.out_b, D);
            dout_b += dx.colwise().sum().transpose();
        }
        Mat<S> dfc_act(L, pl.F);
        dfc_act.noalias() = dx * CMap<S>(p + bo.out_w, pl.F, D).transpose();
        const Mat<S> dfc_pre =
            (dfc_act.array() *
             ba.fc_pre.unaryExpr([](S v) { return gelu_grad(v); }).array())
                .matrix();
        {
            MMap<S> dfc_w(g + bo.fc_w, D, pl.F);
            dfc_w.noalias() += ba.ln2.transpose() * dfc_pre;
            MVMap<S> dfc_b(g + bo.fc_b, pl.F);
            dfc_b += dfc_pre.colwise().sum().transpose();
        }
        Mat<S> dln2(L, D);
        dln2.noalias() = dfc_pre * CMap<S>(p + bo.fc_w, D, pl.F).transpose();
        Mat<S> dx_mid = dx;  // residual path
        {
            MVMap<S> dg(g + bo.ln2_g, D), db(g + bo.ln2_b, D);
            layer_norm_backward<S>(ba.x_mid, ba.ln2_mean, ba.ln2_rstd,
                                   CVMap<S>(p + bo.ln2_g, D), dln2, dx_mid, dg, db);
        }

        // attention branch
        {
            MMap<S> dproj_w(g + bo.proj_w, D, D);
            dproj_w.noalias() += ba.att.transpose() * dx_mid;
            MVMap<S> dproj_b(g + bo.proj_b, D);
            dproj_b += dx_mid.colwise().sum().transpose();
        }
        Mat<S> datt(L, D);
        datt.noalias() = dx_mid * CMap<S>(p + bo.proj_w, D, D).transpose();

        Mat<S> dqkv = Mat<S>::Zero(L, 3 * D);
        for (int h = 0; h < pl.H; ++h) {
            auto Q = ba.qkv.block(0, h * pl.dh, L, pl.dh);
            auto K = ba.qkv.block(0, D + h * pl.dh, L, pl.dh);
            auto V = ba.qkv.block(0, 2 * D + h * pl.dh, L, pl.dh);
            const Mat<S>& P = ba.probs[static_cast<std::size_t>(h)];
            auto dO = datt.block(0, h * pl.dh, L, pl.dh);

            Mat<S> dP(L, L);
            dP.noalias() = dO * V.transpose();
            dqkv.block(0, 2 * D + h * pl.dh, L, pl.dh).noalias() += P.transpose() * dO;

            Mat<S> dS(L, L);
            for (Eigen::Index i = 0; i < L; ++i) {
                auto prow = P.row(i).head(i + 1).array();
                auto dprow = dP.row(i).head(i + 1).array();
                const S dot = (prow * dprow).sum();
                dS.row(i).head(i + 1) = ((prow * (dprow - dot)) * inv_sqrt_dh).matrix();
                if (i + 1 < L) dS.row(i).tail(L - i - 1).setZero();
            }
            dqkv.block(0, h * pl.dh, L, pl.dh).noalias() += dS * K;
            dqkv.block(0, D + h * pl.dh, L, pl.dh).noalias() += dS.transpose() * Q;
        }
        {
            MMap<S> dqkv_w(g + bo.qkv_w, D, 3 * D);
            dqkv_w.noalias() += ba.ln1.transpose() * dqkv;
            MVMap<S> dqkv_b(g + bo.qkv_b, 3 * D);
            dqkv_b += dqkv.colwise().sum().transpose();
        }
        Mat<S> dln1(L, D);
        dln1.noalias() = dqkv * CMap<S>(p + bo.qkv_w, D, 3 * D).transpose();
        dx = dx_mid;  // residual path into the block input
        {
            MVMap<S> dg(g + bo.ln1_g, D), db(g + bo.ln1_b, D);
            layer_norm_backward<S>(ba.x_in, ba.ln1_mean, ba.ln1_rstd,
                                   CVMap<S>(p + bo.ln1_g, D), dln1, dx, dg, db);
        }
    }

    MMap<S> dwte(g + pl.wte, pl.V, D);
    MMap<S> dwpe(g + pl.wpe, pl.C, D);
    for (Eigen::Index i = 0; i < L; ++i) {
        dwte.row(tokens[static_cast<std::size_t>(i)]) += dx.row(i);
        dwpe.row(i) += dx.row(i);
    }
}

void check_sequence(const std::vector<int>& tokens, const std::vector<int>& roles,
                    const std::vector<bool>& predicted, const RoleLayout& layout,
                    const ModelDesc& desc) {
    if (tokens.size() != roles.size() || tokens.size() != predicted.size())
        throw LengthError("sequence/roles/predicted length mismatch");
    if (tokens.size() < 2) throw LengthError("sequence too short");
    if (static_cast<int>(tokens.size()) > desc.context)
        throw LengthError("sequence exceeds model context");
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] < 0 || tokens[i] >= desc.vocab)
            throw BadTokenRole("token id outside vocabulary");
        if (roles[i] < 0 || roles[i] >= static_cast<int>(layout.tokens_per_role.size()))
            throw BadTokenRole("role id outside layout");
    }
}

/// Forward (+ optional backward scaled by grad_weight) of one sequence;
/// returns the masked logprob of its predicted tokens.
template <typename S>
double run_sequence(const ParamLayout& pl, const S* p, const std::vector<int>& tokens,
                    const std::vector<int>& roles, const std::vector<bool>& predicted,
                    const RoleLayout& layout, double grad_weight, S* grad) {
    Acts<S> a;
    forward_full<S>(pl, p, tokens, a);

    const Eigen::Index L = static_cast<Eigen::Index>(tokens.size());
    Mat<S> dlogits;
    if (grad != nullptr) dlogits = Mat<S>::Zero(L, pl.V);

    double logprob = 0.0;
    std::vector<double> probs;
    for (Eigen::Index i = 1; i < L; ++i) {
        if (!predicted[static_cast<std::size_t>(i)]) continue;
        const auto& ids =
            layout
                .tokens_per_role[static_cast<std::size_t>(roles[static_cast<std::size_t>(i)])];
        const int target = tokens[static_cast<std::size_t>(i)];

        probs.resize(ids.size());
        double mx = -1e300;
        for (std::size_t j = 0; j < ids.size(); ++j)
            mx = std::max(mx, static_cast<double>(a.logits(i - 1, ids[j])));
        double sum = 0.0;
        for (std::size_t j = 0; j < ids.size(); ++j) {
            probs[j] = std::exp(static_cast<double>(a.logits(i - 1, ids[j])) - mx);
            sum += probs[j];
        }
        double p_target = -1.0;
        for (std::size_t j = 0; j < ids.size(); ++j) {
            probs[j] /= sum;
            if (ids[j] == target) p_target = probs[j];
        }
        if (p_target < 0.0) throw BadTokenRole("predicted token outside its role vocabulary");
        logprob += std::log(std::max(p_target, kProbFloor));
        if (grad != nullptr) {
            for (std::size_t j = 0; j < ids.size(); ++j) {
                const double one = ids[j] == target ? 1.0 : 0.0;
                dlogits(i - 1, ids[j]) += static_cast<S>(grad_weight * (one - probs[j]));
            }
        }
    }
    if (grad != nullptr) backward_full<S>(pl, p, tokens, a, dlogits, grad);
    return logprob;
}

}  // namespace

void ModelDesc::validate() const {
    if (vocab < 2 || width < 1 || blocks < 1 || heads < 1 || context < 3)
        throw DomainError("model descriptor: non-positive dimension");
    if (width % heads != 0) throw DomainError("model descriptor: heads must divide width");
}

std::int64_t ModelDesc::param_count() const {
    ModelDesc copy = *this;
    copy.validate();
    return static_cast<std::int64_t>(layout_of(copy).total);
}

template <typename S>
Policy<S>::Policy(const ModelDesc& desc, std::uint64_t seed) : desc_(desc), seed_(seed) {
    desc_.validate();
    const ParamLayout pl = layout_of(desc_);
    params_.assign(pl.total, S(0));

    Rng rng(seed, 0x10de1);
    auto fill_normal = [&](std::size_t off, std::size_t n, double scale) {
        for (std::size_t i = 0; i < n; ++i)
            params_[off + i] = static_cast<S>(rng.normal() * scale);
    };
    auto fill_const = [&](std::size_t off, std::size_t n, double v) {
        for (std::size_t i = 0; i < n; ++i) params_[off + i] = static_cast<S>(v);
    };
    const auto V = static_cast<std::size_t>(pl.V), D = static_cast<std::size_t>(pl.D),
               C = static_cast<std::size_t>(pl.C), F = static_cast<std::size_t>(pl.F);
    fill_normal(pl.wte, V * D, 0.02);
    fill_normal(pl.wpe, C * D, 0.01);
    for (const BlockOffsets& b : pl.blocks) {
        fill_const(b.ln1_g, D, 1.0);
        fill_normal(b.qkv_w, D * 3 * D, 0.02);
        fill_normal(b.proj_w, D * D, 0.02);
        fill_const(b.ln2_g, D, 1.0);
        fill_normal(b.fc_w, D * F, 0.02);
        fill_normal(b.out_w, F * D, 0.02);
    }
    fill_const(pl.lnf_g, D, 1.0);
    fill_normal(pl.head_w, D * V, 0.02);
}

template <typename S>
double Policy<S>::sequence_logprob(const std::vector<int>& tokens,
                                   const std::vector<int>& roles,
                                   const std::vector<bool>& predicted,
                                   const RoleLayout& layout) const {
    check_sequence(tokens, roles, predicted, layout, desc_);
    const ParamLayout pl = layout_of(desc_);
    return run_sequence<S>(pl, params_.data(), tokens, roles, predicted, layout, 0.0, nullptr);
}

template <typename S>
double Policy<S>::logprob_grad(const std::vector<int>& tokens, const std::vector<int>& roles,
                               const std::vector<bool>& predicted, const RoleLayout& layout,
                               double weight, std::vector<S>& grad) const {
    check_sequence(tokens, roles, predicted, layout, desc_);
    const ParamLayout pl = layout_of(desc_);
    if (grad.size() != pl.total) throw LengthError("gradient buffer has wrong size");
    return run_sequence<S>(pl, params_.data(), tokens, roles, predicted, layout, weight,
                           grad.data());
}

template <typename S>
double Policy<S>::batch_loss(const std::vector<const std::vector<int>*>& batch,
                             const std::vector<int>& roles, const std::vector<bool>& predicted,
                             const RoleLayout& layout, std::vector<S>* grad,
                             int threads) const {
    if (batch.empty()) throw DomainError("batch_loss: empty batch");
    long long per_seq = 0;
    for (std::size_t i = 1; i < predicted.size(); ++i)
        if (predicted[i]) ++per_seq;
    const long long count = per_seq * static_cast<long long>(batch.size());
    if (count == 0) throw DomainError("batch_loss: nothing to predict");
    for (const auto* seq : batch) check_sequence(*seq, roles, predicted, layout, desc_);

    const ParamLayout pl = layout_of(desc_);
    const double scale = grad != nullptr ? -1.0 / static_cast<double>(count) : 0.0;
    if (grad != nullptr && grad->size() != pl.total)
        throw LengthError("gradient buffer has wrong size");

    std::vector<double> logprobs(batch.size(), 0.0);
    std::vector<std::vector<S>> seq_grads;
    if (grad != nullptr) seq_grads.resize(batch.size());

    parallel_for(
        batch.size(),
        [&](std::size_t i) {
            S* gptr = nullptr;
            if (grad != nullptr) {
                seq_grads[i].assign(pl.total, S(0));
                gptr = seq_grads[i].data();
            }
            logprobs[i] = run_sequence<S>(pl, params_.data(), *batch[i], roles, predicted,
                                          layout, scale, gptr);
        },
        threads);

    if (grad != nullptr) {
        for (const std::vector<S>& sg : seq_grads)
            for (std::size_t j = 0; j < pl.total; ++j) (*grad)[j] += sg[j];
    }
    double total = 0.0;
    for (double lp : logprobs) total += lp;
    return -total / static_cast<double>(count);
}

template <typename S>
std::vector<int> Policy<S>::sample(const std::vector<int>& prefix,
                                   const std::vector<int>& roles, const RoleLayout& layout,
                                   double temperature, int top_k, Rng& rng) const {
    if (!(temperature > 0.0)) throw DomainError("sample: temperature must be > 0");
    if (top_k < 1) throw DomainError("sample: top_k must be >= 1");
    const std::size_t L = roles.size();
    if (prefix.empty() || prefix.size() >= L)
        throw LengthError("sample: prefix must be shorter than the target length");
    if (static_cast<int>(L) > desc_.context)
        throw LengthError("sample: length exceeds context");

    const ParamLayout pl = layout_of(desc_);
    const S* p = params_.data();
    const int D = pl.D;
    CMap<S> wte(p + pl.wte, pl.V, D);
    CMap<S> wpe(p + pl.wpe, pl.C, D);
    const S inv_sqrt_dh = S(1) / std::sqrt(S(pl.dh));

    std::vector<Mat<S>> kc(static_cast<std::size_t>(pl.B)), vc(static_cast<std::size_t>(pl.B));
    for (int b = 0; b < pl.B; ++b) {
        kc[static_cast<std::size_t>(b)].resize(static_cast<Eigen::Index>(L), D);
        vc[static_cast<std::size_t>(b)].resize(static_cast<Eigen::Index>(L), D);
    }

    std::vector<int> tokens = prefix;
    tokens.resize(L, -1);

    Vec<S> x(D), ln(D), tmp(D), att(D);
    Vec<S> qkv(3 * D), fc(pl.F), logits(pl.V);
    std::vector<std::pair<double, int>> cand;

    auto ln_row = [&](const Vec<S>& in, const S* gp, const S* bp, Vec<S>& out) {
        const S m = in.mean();
        const S var = (in.array() - m).square().sum() / S(D);
        const S r = S(1) / std::sqrt(var + S(kLnEps));
        out = (((in.array() - m) * r) * CVMap<S>(gp, D).array() + CVMap<S>(bp, D).array())
                  .matrix();
    };

    for (std::size_t pos = 0; pos + 1 < L; ++pos) {
        x = wte.row(tokens[pos]).transpose() +
            wpe.row(static_cast<Eigen::Index>(pos)).transpose();
        for (int b = 0; b < pl.B; ++b) {
            const BlockOffsets& bo = pl.blocks[static_cast<std::size_t>(b)];
            Mat<S>& K = kc[static_cast<std::size_t>(b)];
            Mat<S>& V = vc[static_cast<std::size_t>(b)];
            ln_row(x, p + bo.ln1_g, p + bo.ln1_b, ln);
            qkv.noalias() = CMap<S>(p + bo.qkv_w, D, 3 * D).transpose() * ln;
            qkv += CVMap<S>(p + bo.qkv_b, 3 * D);
            K.row(static_cast<Eigen::Index>(pos)) = qkv.segment(D, D).transpose();
            V.row(static_cast<Eigen::Index>(pos)) = qkv.segment(2 * D, D).transpose();
            const Eigen::Index n = static_cast<Eigen::Index>(pos) + 1;
            for (int h = 0; h < pl.H; ++h) {
                auto q = qkv.segment(h * pl.dh, pl.dh);
                auto Kh = K.block(0, h * pl.dh, n, pl.dh);
                auto Vh = V.block(0, h * pl.dh, n, pl.dh);
                Vec<S> s(n);
                s.noalias() = Kh * q;
                s *= inv_sqrt_dh;
                const S mx = s.maxCoeff();
                s = (s.array() - mx).exp().matrix();
                s /= s.sum();
                att.segment(h * pl.dh, pl.dh).noalias() = Vh.transpose() * s;
            }
            tmp.noalias() = CMap<S>(p + bo.proj_w, D, D).transpose() * att;
            tmp += CVMap<S>(p + bo.proj_b, D);
            x += tmp;
            ln_row(x, p + bo.ln2_g, p + bo.ln2_b, ln);
            fc.noalias() = CMap<S>(p + bo.fc_w, D, pl.F).transpose() * ln;
            fc += CVMap<S>(p + bo.fc_b, pl.F);
            fc = fc.unaryExpr([](S v) { return gelu_val(v); });
            tmp.noalias() = CMap<S>(p + bo.out_w, pl.F, D).transpose() * fc;
            tmp += CVMap<S>(p + bo.out_b, D);
            x += tmp;
        }

        if (pos + 1 < prefix.size()) continue;  // next token forced

        ln_row(x, p + pl.lnf_g, p + pl.lnf_b, ln);
        logits.noalias() = CMap<S>(p + pl.head_w, D, pl.V).transpose() * ln;
        logits += CVMap<S>(p + pl.head_b, pl.V);

        const auto& ids = layout.tokens_per_role[static_cast<std::size_t>(roles[pos + 1])];
        if (ids.size() == 1) {
            tokens[pos + 1] = ids[0];
            continue;
        }
        cand.clear();
        for (int id : ids) cand.emplace_back(static_cast<double>(logits[id]), id);
        std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        cand.resize(std::min(static_cast<std::size_t>(top_k), cand.size()));
        const double mx = cand[0].first;
        double sum = 0.0;
        for (auto& c : cand) {
            c.first = std::exp((c.first - mx) / temperature);
            sum += c.first;
        }
        const double u = rng.uniform() * sum;
        double acc = 0.0;
        int chosen = cand.back().second;
        for (const auto& c : cand) {
            acc += c.first;
            if (u < acc) {
                chosen = c.second;
                break;
            }
        }
        tokens[pos + 1] = chosen;
    }
    return tokens;
}

template class Policy<float>;
template class Policy<double>;

template <typename S>
void Adam<S>::step(std::vector<S>& params, const std::vector<S>& grad, double lr, double beta1,
                   double beta2, double eps) {
    if (params.size() != grad.size()) throw LengthError("adam: param/grad size mismatch");
    if (m.empty()) {
        m.assign(params.size(), S(0));
        v.assign(params.size(), S(0));
    }
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double gi = static_cast<double>(grad[i]);
        const double mi = beta1 * static_cast<double>(m[i]) + (1.0 - beta1) * gi;
        const double vi = beta2 * static_cast<double>(v[i]) + (1.0 - beta2) * gi * gi;
        m[i] = static_cast<S>(mi);
        v[i] = static_cast<S>(vi);
        params[i] -= static_cast<S>(lr * (mi / bc1) / (std::sqrt(vi / bc2) + eps));
    }
}

template struct Adam<float>;
template struct Adam<double>;

template <typename S>
double sequence_logprob(const Policy<S>& model, const TokenizedTrajectory& seq) {
    const std::size_t L = seq.tokens.size();
    return model.sequence_logprob(seq.tokens, trajectory_roles(L), trajectory_predicted(L),
                                  trajectory_role_layout());
}

template double sequence_logprob<float>(const Policy<float>&, const TokenizedTrajectory&);
template double sequence_logprob<double>(const Policy<double>&, const TokenizedTrajectory&);

template <typename S>
TokenizedTrajectory sample_trajectory(const Policy<S>& model, const PartialShotTags& tags,
                                      int frames, double temperature, int top_k,
                                      std::uint64_t seed) {
    if (frames < 2) throw DomainError("sample_trajectory: frames must be >= 2");
    const std::size_t L = static_cast<std::size_t>(sequence_length(frames));
    Rng rng(seed, 0x5a3);
    TokenizedTrajectory out;
    out.tokens = model.sample(conditioning_tokens(tags), trajectory_roles(L),
                              trajectory_role_layout(), temperature, top_k, rng);
    return out;
}

template TokenizedTrajectory sample_trajectory<float>(const Policy<float>&,
                                                      const PartialShotTags&, int, double, int,
                                                      std::uint64_t);
template TokenizedTrajectory sample_trajectory<double>(const Policy<double>&,
                                                       const PartialShotTags&, int, double,
                                                       int, std::uint64_t);

std::vector<double> pretrain(Policy<float>& model, const std::vector<TokenizedTrajectory>& data,
                             const PretrainHyper& hyper, std::uint64_t seed, int threads) {
    if (data.size() < 64) throw DataTooSmall("pretrain: needs >= 64 sequences");
    if (hyper.epochs < 1 || hyper.batch < 1 || !(hyper.lr > 0.0))
        throw DomainError("pretrain: bad hyperparameters");
    const std::size_t L = data[0].tokens.size();
    for (const TokenizedTrajectory& t : data)
        if (t.tokens.size() != L) throw LengthError("pretrain: mixed sequence lengths");

    const std::vector<int> roles = trajectory_roles(L);
    const std::vector<bool> predicted = trajectory_predicted(L);
    const RoleLayout& layout = trajectory_role_layout();

    std::vector<std::size_t> order(data.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    Adam<float> adam;
    std::vector<float> grad(model.params().size());
    std::vector<double> epoch_losses;
    epoch_losses.reserve(static_cast<std::size_t>(hyper.epochs));

    for (int epoch = 0; epoch < hyper.epochs; ++epoch) {
        Rng shuffle_rng(seed, 0xe90c + static_cast<std::uint64_t>(epoch));
        for (std::size_t i = order.size(); i > 1; --i) {
            const std::size_t j = shuffle_rng.below(i);
            std::swap(order[i - 1], order[j]);
        }
        double loss_sum = 0.0;
        std::size_t seq_count = 0;
        for (std::size_t start = 0; start < order.size();
             start += static_cast<std::size_t>(hyper.batch)) {
            const std::size_t stop =
                std::min(order.size(), start + static_cast<std::size_t>(hyper.batch));
            std::vector<const std::vector<int>*> batch;
            batch.reserve(stop - start);
            for (std::size_t i = start; i < stop; ++i) batch.push_back(&data[order[i]].tokens);
            std::fill(grad.begin(), grad.end(), 0.0f);
            const double loss = model.batch_loss(batch, roles, predicted, layout, &grad, threads);
            adam.step(model.params(), grad, hyper.lr, hyper.beta1, hyper.beta2, hyper.eps);
            loss_sum += loss * static_cast<double>(batch.size());
            seq_count += batch.size();
        }
        epoch_losses.push_back(loss_sum / static_cast<double>(seq_count));
    }
    return epoch_losses;
}

}  // namespace cinecam
