#pragma once

// The two-stage codespace-preparation protocol, simulated exactly in the
// binary Pauli frame: X- and Z-error supports are GF(2) vectors, and the
// measurement randomness of the collapse step enters as a uniformly sampled
// element of the Z-stabilizer group.

#include <functional>

#include "qprep/codes.hpp"
#include "qprep/decoder.hpp"
#include "qprep/rng.hpp"

namespace qprep {

struct NoiseModel {
    double p_data = 0.0;  // independent X and Z error probability per qubit
    double p_synd = 0.0;  // flip probability per Z-check during stage 1
    std::uint64_t seed = 0;

    void validate() const {
        if (p_data < 0 || p_data >= 0.5 || p_synd < 0 || p_synd >= 0.5)
            throw std::invalid_argument("NoiseModel probabilities must lie in [0, 1/2)");
    }
};

inline BinaryVector sample_bernoulli(std::size_t len, double p, Rng& rng) {
    BinaryVector v(len);
    if (p <= 0.0) return v;
    for (std::size_t i = 0; i < len; ++i)
        if (rng.bernoulli(p)) v.set(i, true);
    return v;
}

// ---------------------------------------------------------------------------
// Intrinsic errors
// ---------------------------------------------------------------------------

/// Uniform sampling from the Z-stabilizer group of a code, returned as a
/// Z-support vector over all qubits.
class IntrinsicSampler {
public:
    explicit IntrinsicSampler(const BinaryMatrix& h_z) : rows_(h_z) {}

    BinaryVector sample(Rng& rng) const {
        BinaryVector v(rows_.cols());
        for (std::size_t r = 0; r < rows_.rows(); ++r)
            if (rng.next() & 1) rows_.xor_row_into(r, v);
        return v;
    }

private:
    PackedMatrix rows_;
};

inline BinaryVector sample_intrinsic_error(const ThickenedCode& thick, Rng& rng) {
    return IntrinsicSampler(thick.css.h_z).sample(rng);
}

// ---------------------------------------------------------------------------
// Sheet views
// ---------------------------------------------------------------------------

/// Per-sheet X-measurement data, aligned with the causal processing order:
/// outcomes[i] is the sheet's qubit outcome vector, syndromes[i] the sheet's
/// reconstructed X-syndrome (sheet outcomes plus all adjacent intermediate
/// layers).
struct SheetViews {
    std::vector<BinaryVector> outcomes;   // length n_base each
    std::vector<BinaryVector> syndromes;  // length mx_base each
};

/// Builds sheet views from the bulk X-measurement outcome vector (full
/// thickened length; entries on unmeasured boundary sheets are ignored).
inline SheetViews reconstruct_sheet_views(const BinaryVector& outcomes, const ThickenedCode& thick) {
    const ThickenedLayout& ly = thick.layout;
    if (outcomes.size() != ly.n_thick())
        throw std::invalid_argument("reconstruct_sheet_views: outcome length " + std::to_string(outcomes.size()) +
                                    " vs " + std::to_string(ly.n_thick()) + " thickened qubits");
    std::vector<BinaryVector> layer(ly.mc);
    for (std::size_t c = 0; c < ly.mc; ++c) layer[c] = ly.restrict_to_layer(outcomes, c);

    SheetViews views;
    views.outcomes.reserve(ly.causal.order.size());
    views.syndromes.reserve(ly.causal.order.size());
    for (const auto& step : ly.causal.order) {
        BinaryVector x = ly.restrict_to_sheet(outcomes, step.bit);
        BinaryVector s = matvec(thick.base.h_x, x);
        for (std::uint32_t c : ly.causal.bit_checks[step.bit]) s ^= layer[c];
        views.outcomes.push_back(std::move(x));
        views.syndromes.push_back(std::move(s));
    }
    return views;
}

// ---------------------------------------------------------------------------
// Collapse correction (chain and star)
// ---------------------------------------------------------------------------

/// Per-sheet single-shot decode step: maps an observed sheet syndrome to
/// (inferred data correction, inferred syndrome error).
using SheetDecodeFn = std::function<std::pair<BinaryVector, BinaryVector>(const BinaryVector&)>;

struct CollapseResult {
    /// Boundary Z-corrections, aligned with layout.causal.boundary_bits.
    std::vector<BinaryVector> boundary_corrections;
    std::size_t decoder_calls = 0;
};

/// Walks the causal order: at each measured sheet the running syndrome
/// repair is folded into the observed syndrome, the sheet is decoded, and
/// the outcome pattern plus inferred correction is pushed through the
/// sheet's outgoing checks.  A star center duplicates the running state
/// onto every outgoing branch.
inline CollapseResult run_collapse(const ThickenedCode& thick, const SheetViews& views, const SheetDecodeFn& decode) {
    const ThickenedLayout& ly = thick.layout;
    const CausalStructure& cs = ly.causal;
    if (views.outcomes.size() != cs.order.size())
        throw std::invalid_argument("run_collapse: views do not match the causal order");

    struct Message {
        BinaryVector z;     // accumulated Z-correction
        BinaryVector shat;  // inferred syndrome error carried forward
        bool set = false;
    };
    std::vector<Message> msg(ly.mc);

    CollapseResult out;
    for (std::size_t i = 0; i < cs.order.size(); ++i) {
        const auto& step = cs.order[i];
        BinaryVector z_in(ly.n_base), shat_in(ly.mx_base);
        if (step.in_check >= 0) {
            const Message& m = msg[static_cast<std::size_t>(step.in_check)];
            if (!m.set) throw std::logic_error("run_collapse: causal order visited a sheet before its predecessor");
            z_in = m.z;
            shat_in = m.shat;
        }
        BinaryVector observed = views.syndromes[i] ^ shat_in;
        auto [z_hat, shat_out] = decode(observed);
        ++out.decoder_calls;
        if (z_hat.size() != ly.n_base || shat_out.size() != ly.mx_base)
            throw std::invalid_argument("run_collapse: sheet decoder returned wrong lengths");
        BinaryVector z_out = z_in ^ views.outcomes[i] ^ z_hat;
        for (std::uint32_t c : cs.bit_checks[step.bit]) {
            if (static_cast<std::int32_t>(c) == step.in_check) continue;
            msg[c].z = z_out;
            msg[c].shat = shat_out;
            msg[c].set = true;
        }
    }
    out.boundary_corrections.reserve(cs.boundary_bits.size());
    for (std::uint32_t b : cs.boundary_bits) {
        if (cs.in_check_of[b] < 0) {
            out.boundary_corrections.emplace_back(ly.n_base);  // single-sheet degenerate case
            continue;
        }
        const Message& m = msg[static_cast<std::size_t>(cs.in_check_of[b])];
        if (!m.set) throw std::logic_error("run_collapse: boundary sheet never received a message");
        out.boundary_corrections.push_back(m.z);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Adjudication
// ---------------------------------------------------------------------------

enum class Sector { X, Z };

/// Logical-failure verdict for a residual error that the final perfect
/// decode has already returned to the kernel.  An X residual fails when it
/// pairs nontrivially with some Z-logical; a Z residual symmetrically.
inline bool adjudicate(const BinaryVector& residual, const CssCode& code, Sector type) {
    const BinaryMatrix& kernel_of = (type == Sector::X) ? code.h_z : code.h_x;
    if (!matvec(kernel_of, residual).is_zero())
        throw std::logic_error("adjudicate: residual does not satisfy the checks");
    const std::optional<BinaryMatrix>& pairing = (type == Sector::X) ? code.l_z : code.l_x;
    if (!pairing) throw std::invalid_argument("adjudicate: code is missing its logical basis");
    return !matvec(*pairing, residual).is_zero();
}

// ---------------------------------------------------------------------------
// Protocol engine
// ---------------------------------------------------------------------------

struct DecoderSettings {
    BpConfig bp;   // channel_prior is overridden per stage
    OsdConfig osd;
};

/// Trace of one full-protocol trial; every recorded syndrome satisfies its
/// defining relation against the recorded errors.
struct ProtocolTrace {
    BinaryVector injected_syndrome_error;  // s_e over the thickened Z-checks
    BinaryVector syndrome_repair;          // from the metacheck stage
    BinaryVector repaired_syndrome;
    BinaryVector stage1_residual;             // X support, thickened
    std::vector<BinaryVector> stage1_boundary;  // restriction per endpoint
    bool stage1_fallback = false;

    BinaryVector intrinsic;      // sampled Z-stabilizer element
    BinaryVector bulk_z_error;   // injected bulk Z noise
    std::vector<BinaryVector> collapse_corrections;  // per endpoint
};

struct FullTrialResult {
    std::vector<bool> x_failures;                 // per endpoint
    std::vector<bool> z_failures;                 // per endpoint
    std::vector<std::size_t> boundary_violations;  // X-check violations before the final decode
};

class ProtocolEngine {
public:
    /// Stage-1 data noise is off by default: syndrome flips are the only
    /// stage-1 noise, with `stage1_data_noise` restoring combined noise.
    ProtocolEngine(const ThickenedCode& thick, DecoderSettings settings, NoiseModel noise,
                   bool stage1_data_noise = false)
        : thick_(thick), settings_(settings), noise_(noise), stage1_data_noise_(stage1_data_noise) {
        noise_.validate();
        if (!thick.base.l_x || !thick.base.l_z)
            throw std::invalid_argument("ProtocolEngine: base code needs attached logical bases");
        main_prior_ = noise.p_data > 0 ? noise.p_data : noise.p_synd;
        if (main_prior_ <= 0) main_prior_ = 1e-3;  // noiseless runs still need a working decoder
    }

    const ThickenedCode& code() const { return thick_; }

    /// Stage 1: sample Z-check flips, repair them through the metachecks,
    /// decode the repaired syndrome.  The true syndrome is the all-zero
    /// vector, so the returned correction is the residual X error.
    BinaryVector stage1_simulate(Rng& rng, ProtocolTrace* trace = nullptr) {
        const std::size_t m = thick_.css.h_z.rows();
        BinaryVector observed = sample_bernoulli(m, noise_.p_synd, rng);
        if (stage1_data_noise_) {
            BinaryVector e = sample_bernoulli(thick_.css.n, noise_.p_data, rng);
            observed ^= matvec(thick_.css.h_z, e);
            // the injected error itself stays in the state; fold it into the
            // residual below
            stage1_injected_ = e;
        } else {
            stage1_injected_ = BinaryVector(thick_.css.n);
        }
        BinaryVector residual;
        if (thick_.layout.fault_tolerant) {
            auto res = ensure_two_stage().decode(observed);
            residual = stage1_injected_ ^ res.correction;
            if (trace) {
                trace->injected_syndrome_error = observed;
                trace->syndrome_repair = res.repair;
                trace->repaired_syndrome = res.repaired;
                trace->stage1_fallback = res.used_fallback;
            }
        } else {
            auto res = ensure_stage1_plain().decode(observed);
            residual = stage1_injected_ ^ res.correction;
            if (trace) {
                trace->injected_syndrome_error = observed;
                trace->syndrome_repair = BinaryVector(m);
                trace->repaired_syndrome = observed;
            }
        }
        if (trace) {
            trace->stage1_residual = residual;
            trace->stage1_boundary.clear();
            for (std::uint32_t b : thick_.layout.causal.boundary_bits)
                trace->stage1_boundary.push_back(thick_.layout.restrict_to_sheet(residual, b));
        }
        return residual;
    }

    /// Experiment-1 trial: stage 1 under syndrome noise, boundary hand-off,
    /// a fresh X round at p_data, one perfect-syndrome decode, X-sector
    /// verdict per endpoint.
    std::vector<bool> trial_prepare_plus(Rng& rng, ProtocolTrace* trace = nullptr) {
        BinaryVector residual = stage1_simulate(rng, trace);
        std::vector<bool> verdicts;
        for (std::uint32_t b : thick_.layout.causal.boundary_bits) {
            BinaryVector r = thick_.layout.restrict_to_sheet(residual, b);
            r ^= sample_bernoulli(thick_.base.n, noise_.p_data, rng);
            BinaryVector s = matvec(thick_.base.h_z, r);
            BinaryVector net = r ^ ensure_final_x().decode(s).correction;
            verdicts.push_back(adjudicate(net, thick_.base, Sector::X));
        }
        return verdicts;
    }

    /// Experiment-2 trial: intrinsic Z-stabilizer sample plus bulk Z noise,
    /// dimensional collapse with the single-shot sheet decoder, one perfect
    /// decode per endpoint, Z-sector verdicts.
    FullTrialResult trial_collapse(Rng& rng, ProtocolTrace* trace = nullptr) {
        BinaryVector zerr = ensure_intrinsic().sample(rng);
        if (trace) trace->intrinsic = zerr;
        BinaryVector bulk = sample_bulk_z(rng);
        if (trace) trace->bulk_z_error = bulk;
        zerr ^= bulk;

        SheetViews views = reconstruct_sheet_views(zerr, thick_);
        auto& sheet_dec = ensure_sheet();
        CollapseResult collapse = run_collapse(thick_, views, [&](const BinaryVector& s) {
            auto res = sheet_dec.decode(s);
            return std::make_pair(res.data_correction, res.inferred_syndrome);
        });
        if (trace) trace->collapse_corrections = collapse.boundary_corrections;

        FullTrialResult out;
        const auto& ends = thick_.layout.causal.boundary_bits;
        for (std::size_t j = 0; j < ends.size(); ++j) {
            BinaryVector net0 = thick_.layout.restrict_to_sheet(zerr, ends[j]) ^ collapse.boundary_corrections[j];
            BinaryVector s_fin = matvec(thick_.base.h_x, net0);
            out.boundary_violations.push_back(s_fin.weight());
            BinaryVector net = net0 ^ ensure_final_z().decode(s_fin).correction;
            out.z_failures.push_back(adjudicate(net, thick_.base, Sector::Z));
        }
        return out;
    }

    /// Full protocol: stage 1, hand-off, collapse, fresh boundary X noise,
    /// final perfect decodes, verdicts for both sectors.
    FullTrialResult trial_full(Rng& rng, ProtocolTrace* trace = nullptr) {
        BinaryVector residual = stage1_simulate(rng, trace);
        FullTrialResult out = trial_collapse(rng, trace);
        for (std::uint32_t b : thick_.layout.causal.boundary_bits) {
            BinaryVector r = thick_.layout.restrict_to_sheet(residual, b);
            r ^= sample_bernoulli(thick_.base.n, noise_.p_data, rng);
            BinaryVector s = matvec(thick_.base.h_z, r);
            BinaryVector net = r ^ ensure_final_x().decode(s).correction;
            out.x_failures.push_back(adjudicate(net, thick_.base, Sector::X));
        }
        return out;
    }

    /// Collapse with a caller-supplied sheet decoder; returns the raw
    /// boundary residual (error plus pushed correction) per endpoint.  Used
    /// by the exhaustive bound suites with exact and shadow decoders.
    std::vector<BinaryVector> collapse_residuals(const BinaryVector& zerr, const SheetDecodeFn& decode) {
        SheetViews views = reconstruct_sheet_views(zerr, thick_);
        CollapseResult collapse = run_collapse(thick_, views, decode);
        std::vector<BinaryVector> out;
        const auto& ends = thick_.layout.causal.boundary_bits;
        for (std::size_t j = 0; j < ends.size(); ++j)
            out.push_back(thick_.layout.restrict_to_sheet(zerr, ends[j]) ^ collapse.boundary_corrections[j]);
        return out;
    }

    BinaryVector sample_bulk_z(Rng& rng) {
        BinaryVector v(thick_.layout.n_thick());
        if (noise_.p_data <= 0) return v;
        const auto& ly = thick_.layout;
        std::vector<bool> is_boundary(ly.ell, false);
        for (std::uint32_t b : ly.causal.boundary_bits) is_boundary[b] = true;
        for (std::size_t sheet = 0; sheet < ly.ell; ++sheet) {
            if (is_boundary[sheet]) continue;
            for (std::size_t q = 0; q < ly.n_base; ++q)
                if (rng.bernoulli(noise_.p_data)) v.set(ly.sheet_qubit(sheet, q), true);
        }
        for (std::size_t c = 0; c < ly.mc; ++c)
            for (std::size_t i = 0; i < ly.mx_base; ++i)
                if (rng.bernoulli(noise_.p_data)) v.set(ly.inter_qubit(c, i), true);
        return v;
    }

    TwoStageDecoder& ensure_two_stage() {
        if (!two_stage_) {
            BpConfig meta = settings_.bp;
            meta.channel_prior = noise_.p_synd > 0 ? noise_.p_synd : main_prior_;
            BpConfig main = settings_.bp;
            main.channel_prior = main_prior_;
            two_stage_.emplace(thick_.css.h_z, *thick_.css.m_z, meta, main, settings_.osd);
        }
        return *two_stage_;
    }
    BpOsdDecoder& ensure_stage1_plain() {
        if (!stage1_plain_) {
            BpConfig cfg = settings_.bp;
            cfg.channel_prior = main_prior_;
            stage1_plain_.emplace(thick_.css.h_z, cfg, settings_.osd);
        }
        return *stage1_plain_;
    }
    SingleShotDecoder& ensure_sheet() {
        if (!sheet_) {
            BpConfig cfg = settings_.bp;
            cfg.channel_prior = main_prior_;
            sheet_.emplace(thick_.base.h_x, cfg, settings_.osd, main_prior_, main_prior_);
        }
        return *sheet_;
    }
    BpOsdDecoder& ensure_final_x() {
        if (!final_x_) {
            BpConfig cfg = settings_.bp;
            cfg.channel_prior = main_prior_;
            final_x_.emplace(thick_.base.h_z, cfg, settings_.osd);
        }
        return *final_x_;
    }
    BpOsdDecoder& ensure_final_z() {
        if (!final_z_) {
            BpConfig cfg = settings_.bp;
            cfg.channel_prior = main_prior_;
            final_z_.emplace(thick_.base.h_x, cfg, settings_.osd);
        }
        return *final_z_;
    }
    IntrinsicSampler& ensure_intrinsic() {
        if (!intrinsic_) intrinsic_.emplace(thick_.css.h_z);
        return *intrinsic_;
    }

private:
    const ThickenedCode& thick_;
    DecoderSettings settings_;
    NoiseModel noise_;
    bool stage1_data_noise_;
    double main_prior_;
    BinaryVector stage1_injected_;

    std::optional<TwoStageDecoder> two_stage_;
    std::optional<BpOsdDecoder> stage1_plain_;
    std::optional<SingleShotDecoder> sheet_;
    std::optional<BpOsdDecoder> final_x_, final_z_;
    std::optional<IntrinsicSampler> intrinsic_;
};

// ---------------------------------------------------------------------------
// Repeated-measurement baseline
// ---------------------------------------------------------------------------

/// Transversal initialization with `rounds` rounds of noisy Z-syndrome
/// measurement, decoded over the full spacetime history.  Detector rows are
/// consecutive syndrome differences; columns are per-round measurement
/// faults (the rounds see syndrome noise only, matching the protocol's
/// stage-1 noise model).  The repaired final-round syndrome defines the
/// Pauli frame and its decode is the residual handed to the same finale as
/// the protocol trials.  One round reduces to plain transversal
/// initialization.
class BaselineEngine {
public:
    BaselineEngine(const CssCode& base, std::size_t rounds, DecoderSettings settings, NoiseModel noise)
        : base_(base), rounds_(rounds), settings_(settings), noise_(noise) {
        noise_.validate();
        if (rounds < 1) throw std::invalid_argument("BaselineEngine: rounds must be >= 1");
        if (!base.l_z) throw std::invalid_argument("BaselineEngine: base code needs attached logical bases");
        const std::size_t m = base.h_z.rows();
        prior_ = noise.p_data > 0 ? noise.p_data : (noise.p_synd > 0 ? noise.p_synd : 1e-3);
        if (rounds >= 2) {
            detector_ = tensor_product(BinaryMatrix::identity(m), repetition_code(rounds).h);
            BpConfig cfg = settings.bp;
            cfg.channel_prior = noise.p_synd > 0 ? noise.p_synd : prior_;
            history_.emplace(detector_, cfg, settings.osd);
        }
        BpConfig cfg = settings.bp;
        cfg.channel_prior = prior_;
        final_.emplace(base.h_z, cfg, settings.osd);
    }

    bool trial(Rng& rng) {
        const std::size_t m = base_.h_z.rows();
        // per-round measurement faults; no data noise during the rounds
        std::vector<BinaryVector> faults;
        faults.reserve(rounds_);
        for (std::size_t r = 0; r < rounds_; ++r) faults.push_back(sample_bernoulli(m, noise_.p_synd, rng));

        BinaryVector frame = faults.back();  // believed final syndrome
        if (rounds_ >= 2) {
            BinaryVector detectors(m * (rounds_ - 1));
            for (std::size_t r = 0; r + 1 < rounds_; ++r) {
                BinaryVector diff = faults[r] ^ faults[r + 1];
                for (std::size_t i = 0; i < m; ++i)
                    if (diff.get(i)) detectors.set(i * (rounds_ - 1) + r, true);
            }
            BinaryVector inferred = history_->decode(detectors).correction;
            // the inferred fault of the final round repairs the frame
            for (std::size_t i = 0; i < m; ++i)
                if (inferred.get(i * rounds_ + (rounds_ - 1))) frame.flip(i);
        }
        BinaryVector residual = final_->decode(frame).correction;
        residual ^= sample_bernoulli(base_.n, noise_.p_data, rng);
        BinaryVector net = residual ^ final_->decode(matvec(base_.h_z, residual)).correction;
        return adjudicate(net, base_, Sector::X);
    }

private:
    const CssCode& base_;
    std::size_t rounds_;
    DecoderSettings settings_;
    NoiseModel noise_;
    double prior_;
    BinaryMatrix detector_;
    std::optional<BpOsdDecoder> history_;
    std::optional<BpOsdDecoder> final_;
};

}  // namespace qprep
