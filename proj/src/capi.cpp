#include "rhmc.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "convolution.hpp"
#include "cxmat.hpp"
#include "monodromy.hpp"
#include "rhsolve.hpp"
#include "tuple_io.hpp"

struct rhmc_tuple {
    rhmc::TupleFile tf;
};

namespace {

using nlohmann::json;
using namespace rhmc;

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (p) std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

template <class F>
rhmc_status guarded(F&& body) {
    try {
        g_last_error.clear();
        body();
        return RHMC_OK;
    } catch (const rhmc_error& e) {
        g_last_error = e.what();
        return static_cast<rhmc_status>(static_cast<int>(e.code));
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return RHMC_ERROR_PRECONDITION;
    }
}

/* caller-tunable knobs shared by every operation */
struct Options {
    ToleranceConfig cfg;
    unsigned seed = 0;
    int restarts = 24;
    std::vector<cplx> lambda_extras;
    std::optional<std::vector<cplx>> points;
};

double opt_number(const json& j, const std::string& key) {
    if (!j.is_number() || !std::isfinite(j.get<double>()))
        throw rhmc_error(status::parse, "options: '" + key + "' must be a finite number");
    return j.get<double>();
}

cplx opt_pair(const json& j, const std::string& key) {
    if (!j.is_array() || j.size() != 2)
        throw rhmc_error(status::parse, "options: '" + key + "' entries must be [re, im] pairs");
    return {opt_number(j[0], key), opt_number(j[1], key)};
}

Options parse_options(const char* text) {
    Options o;
    if (!text || !*text) return o;
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw rhmc_error(status::parse, "options: not a JSON object");
    for (const auto& [key, val] : doc.items()) {
        if (key == "rank_rel_tol")
            o.cfg.rank_rel_tol = opt_number(val, key);
        else if (key == "eig_cluster_tol")
            o.cfg.eig_cluster_tol = opt_number(val, key);
        else if (key == "conj_tol")
            o.cfg.conj_tol = opt_number(val, key);
        else if (key == "seed") {
            if (!val.is_number_integer() || val.get<long long>() < 0)
                throw rhmc_error(status::parse, "options: 'seed' must be a nonnegative integer");
            o.seed = static_cast<unsigned>(val.get<long long>());
        } else if (key == "restarts") {
            if (!val.is_number_integer() || val.get<int>() < 1)
                throw rhmc_error(status::parse, "options: 'restarts' must be a positive integer");
            o.restarts = val.get<int>();
        } else if (key == "lambda_extras") {
            if (!val.is_array()) throw rhmc_error(status::parse, "options: 'lambda_extras' must be an array");
            for (const json& e : val) o.lambda_extras.push_back(opt_pair(e, key));
        } else if (key == "points") {
            if (!val.is_array()) throw rhmc_error(status::parse, "options: 'points' must be an array");
            std::vector<cplx> pts;
            for (const json& e : val) pts.push_back(opt_pair(e, key));
            o.points = std::move(pts);
        } else {
            throw rhmc_error(status::parse, "options: unknown key '" + key + "'");
        }
    }
    return o;
}

const TupleFile& need(const rhmc_tuple* t, const char* who) {
    if (!t) throw rhmc_error(status::precondition, std::string(who) + ": null tuple handle");
    return t->tf;
}

void require_role(const TupleFile& tf, TupleRole role, const char* who) {
    if (tf.tuple.role != role)
        throw rhmc_error(status::precondition,
                         std::string(who) + ": needs role \"" +
                             (role == TupleRole::monodromy ? "monodromy" : "residue") + "\"");
}

std::vector<cplx> resolve_points(const TupleFile& tf, const Options& o, const char* who) {
    if (o.points) return *o.points;
    if (tf.points) return *tf.points;
    throw rhmc_error(status::precondition,
                     std::string(who) + ": needs points in the file or the options");
}

json pair_json(cplx z) { return json::array({z.real(), z.imag()}); }

json matrix_json(const CMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); i++) {
        json row = json::array();
        for (int j = 0; j < m.cols(); j++) row.push_back(pair_json(m(i, j)));
        rows.push_back(row);
    }
    return rows;
}

json witness_json(const std::vector<std::pair<int, cplx>>& ws) {
    json out = json::array();
    for (const auto& [i, tau] : ws) out.push_back(json::array({i, pair_json(tau)}));
    return out;
}

json condition_json(const ConditionReport& rep) {
    return {{"star_ok", rep.star_ok},
            {"star_star_ok", rep.star_star_ok},
            {"star_witnesses", witness_json(rep.star_witnesses)},
            {"star_star_witnesses", witness_json(rep.star_star_witnesses)}};
}

json jordan_json(const JordanStructure& js) {
    json out = json::array();
    for (const JordanGroup& g : js)
        out.push_back({{"eigenvalue", pair_json(g.eigenvalue)}, {"blocks", g.block_sizes}});
    return out;
}

void set_out(char** slot, const std::string& text) {
    if (slot) *slot = dup_string(text);
}

rhmc_tuple* make_handle(TupleFile tf) { return new rhmc_tuple{std::move(tf)}; }

/* shared body of the two convolution entry points */
void run_mc(const rhmc_tuple* t, ConvolutionKind kind, cplx param, const char* options_json,
            rhmc_tuple** out, char** report_json) {
    const char* who = kind == ConvolutionKind::multiplicative ? "mc-mult" : "mc-add";
    const TupleFile& tf = need(t, who);
    require_role(tf, kind == ConvolutionKind::multiplicative ? TupleRole::monodromy : TupleRole::residue, who);
    tf.tuple.validate();
    Options o = parse_options(options_json);

    ConvolutionBlocks blocks = kind == ConvolutionKind::multiplicative
                                   ? build_mult_blocks(tf.tuple, param)
                                   : build_add_blocks(tf.tuple, param);
    QuotientFrame frame = quotient_frame(blocks, o.cfg);
    MatrixTuple result = kind == ConvolutionKind::multiplicative
                             ? middle_convolve_mult(tf.tuple, param, o.cfg)
                             : middle_convolve_add(tf.tuple, param, o.cfg);

    TupleFile out_tf;
    out_tf.tuple = result;
    if (tf.points && result.p() > 0) out_tf.points = tf.points;

    json rep = {{"m", frame.m},
                {"kernel_dim", (int)frame.K_basis.size()},
                {"relation_kernel_dim", (int)frame.L_basis.size()},
                {"conditions", condition_json(check_conditions(tf.tuple, o.cfg))}};
    if (kind == ConvolutionKind::multiplicative && std::abs(param - 1.0) > 0.0)
        rep["predicted_dim"] = predicted_dim(tf.tuple, param, o.cfg);
    if (frame.m == 0) rep["note"] = "empty quotient: the convolution collapses this tuple";

    if (out) *out = make_handle(std::move(out_tf));
    set_out(report_json, rep.dump(2) + "\n");
}

}  // namespace

extern "C" {

const char* rhmc_last_error(void) { return g_last_error.c_str(); }

void rhmc_string_free(char* s) { std::free(s); }

void rhmc_tuple_free(rhmc_tuple* t) { delete t; }

rhmc_status rhmc_tuple_parse(const char* text, rhmc_tuple** out) {
    return guarded([&] {
        if (!text) throw rhmc_error(status::parse, "null document");
        if (!out) throw rhmc_error(status::precondition, "null output pointer");
        *out = make_handle(parse_tuple_file(text));
    });
}

rhmc_status rhmc_tuple_load(const char* path, rhmc_tuple** out) {
    return guarded([&] {
        if (!path) throw rhmc_error(status::parse, "null path");
        if (!out) throw rhmc_error(status::precondition, "null output pointer");
        *out = make_handle(load_tuple_file(path));
    });
}

rhmc_status rhmc_tuple_emit(const rhmc_tuple* t, char** text_out) {
    return guarded([&] {
        const TupleFile& tf = need(t, "emit");
        if (!text_out) throw rhmc_error(status::precondition, "null output pointer");
        *text_out = dup_string(emit_tuple_file(tf));
    });
}

rhmc_status rhmc_tuple_save(const rhmc_tuple* t, const char* path) {
    return guarded([&] {
        const TupleFile& tf = need(t, "save");
        if (!path) throw rhmc_error(status::parse, "null path");
        save_tuple_file(tf, path);
    });
}

rhmc_status rhmc_tuple_info(const rhmc_tuple* t, int* p, int* n, int* is_residue, int* has_points) {
    return guarded([&] {
        const TupleFile& tf = need(t, "info");
        if (p) *p = tf.tuple.p();
        if (n) *n = tf.tuple.n();
        if (is_residue) *is_residue = tf.tuple.role == TupleRole::residue ? 1 : 0;
        if (has_points) *has_points = tf.points ? 1 : 0;
    });
}

rhmc_status rhmc_mc_mult(const rhmc_tuple* t, double lambda_re, double lambda_im,
                         const char* options_json, rhmc_tuple** out, char** report_json) {
    return guarded([&] {
        run_mc(t, ConvolutionKind::multiplicative, {lambda_re, lambda_im}, options_json, out, report_json);
    });
}

rhmc_status rhmc_mc_add(const rhmc_tuple* t, double nu_re, double nu_im,
                        const char* options_json, rhmc_tuple** out, char** report_json) {
    return guarded([&] {
        run_mc(t, ConvolutionKind::additive, {nu_re, nu_im}, options_json, out, report_json);
    });
}

rhmc_status rhmc_predicted_dim(const rhmc_tuple* t, double lambda_re, double lambda_im,
                               const char* options_json, int* dim_out) {
    return guarded([&] {
        const TupleFile& tf = need(t, "dim");
        require_role(tf, TupleRole::monodromy, "dim");
        tf.tuple.validate();
        if (!dim_out) throw rhmc_error(status::precondition, "null output pointer");
        Options o = parse_options(options_json);
        *dim_out = predicted_dim(tf.tuple, {lambda_re, lambda_im}, o.cfg);
    });
}

rhmc_status rhmc_check_conditions(const rhmc_tuple* t, const char* options_json,
                                  char** report_json) {
    return guarded([&] {
        const TupleFile& tf = need(t, "conditions");
        tf.tuple.validate();
        Options o = parse_options(options_json);
        set_out(report_json, condition_json(check_conditions(tf.tuple, o.cfg)).dump(2) + "\n");
    });
}

rhmc_status rhmc_predict_jordan(const rhmc_tuple* t, double lambda_re, double lambda_im,
                                const char* options_json, char** report_json) {
    return guarded([&] {
        const TupleFile& tf = need(t, "predict-jordan");
        require_role(tf, TupleRole::monodromy, "predict-jordan");
        tf.tuple.validate();
        Options o = parse_options(options_json);
        cplx lam{lambda_re, lambda_im};
        int m = predicted_dim(tf.tuple, lam, o.cfg);

        json finite = json::array();
        for (const CMatrix& g : tf.tuple.matrices)
            finite.push_back(jordan_json(
                predict_jordan_mc(jordan_structure(g, o.cfg), lam, JordanPosition::finite, m, o.cfg)));
        json at_inf = jordan_json(predict_jordan_mc(jordan_structure(tf.tuple.combined(), o.cfg),
                                                    lam, JordanPosition::infinity, m, o.cfg));

        json rep = {{"m", m}, {"finite", finite}, {"infinity", at_inf}};
        set_out(report_json, rep.dump(2) + "\n");
    });
}

rhmc_status rhmc_solve(const rhmc_tuple* t, const char* options_json,
                       rhmc_tuple** system_out, char** trace_text) {
    return guarded([&] {
        const TupleFile& tf = need(t, "solve");
        require_role(tf, TupleRole::monodromy, "solve");
        tf.tuple.validate();
        Options o = parse_options(options_json);
        std::vector<cplx> points = resolve_points(tf, o, "solve");

        auto [sys, trace] =
            general_scheme_solve(tf.tuple, points, o.cfg, o.seed, o.lambda_extras, o.restarts);

        char buf[160];
        auto cnum = [&](cplx z) {
            std::snprintf(buf, sizeof buf, "%.17g%+.17gi", z.real(), z.imag());
            return std::string(buf);
        };
        auto enum_ = [&](double v) {
            std::snprintf(buf, sizeof buf, "%.3e", v);
            return std::string(buf);
        };
        auto okno = [](bool b) { return b ? "ok" : "FAIL"; };

        std::string tr;
        tr += "scheme trace\n";
        tr += "  input: n=" + std::to_string(tf.tuple.n()) + " p=" + std::to_string(tf.tuple.p()) +
              " monodromy tuple\n";
        tr += std::string("  input conditions: (*) ") + okno(trace.input_conditions.star_ok) +
              "  (**) " + okno(trace.input_conditions.star_star_ok) + "\n";
        if (trace.reduced) {
            tr += "  candidates with quotient dimension 2: " + std::to_string(trace.candidates.size()) + "\n";
            for (size_t i = 0; i < trace.candidates.size(); i++)
                tr += "    [" + std::to_string(i + 1) + "] " + cnum(trace.candidates[i]) +
                      (trace.candidates[i] == trace.lambda ? "   <- chosen\n" : "\n");
            tr += "  lambda: " + cnum(trace.lambda) + "\n";
            tr += "  reduced tuple: p=" + std::to_string(trace.reduced_tuple.p()) + "\n";
            tr += "  nu: " + cnum(trace.nu) + "   (exp(2 pi i nu) = 1/lambda)\n";
            tr += std::string("  lift conditions: (*) ") + okno(trace.lift_conditions.star_ok) +
                  "  (**) " + okno(trace.lift_conditions.star_star_ok) + "  rank-match " +
                  okno(trace.lift_conditions.rank_match_ok) + "  infinity-rank " +
                  okno(trace.lift_conditions.infinity_rank_ok) + "\n";
        }
        tr += "  verification residual: " + enum_(trace.verify_residual) + "\n";
        tr += "  relation defect: " + enum_(trace.relation_defect) + "\n";
        for (const std::string& note : trace.notes) tr += "  note: " + note + "\n";

        if (system_out) *system_out = make_handle(file_from_system(sys));
        set_out(trace_text, tr);
    });
}

rhmc_status rhmc_monodromy(const rhmc_tuple* system, const char* options_json,
                           rhmc_tuple** tuple_out, char** report_json) {
    return guarded([&] {
        const TupleFile& tf = need(system, "monodromy");
        Options o = parse_options(options_json);
        TupleFile local = tf;
        if (o.points) local.points = o.points;
        FuchsianSystem sys = system_from_file(local);

        MonodromyResult res = compute_monodromy(sys);

        TupleFile out_tf;
        out_tf.tuple = res.tuple;
        out_tf.points = sys.points;

        json rep = {{"relation_defect", res.relation_defect},
                    {"defect_flagged", res.defect_flagged},
                    {"loop_errors", res.loop_errors}};
        if (tuple_out) *tuple_out = make_handle(std::move(out_tf));
        set_out(report_json, rep.dump(2) + "\n");
    });
}

rhmc_status rhmc_verify(const rhmc_tuple* system, const rhmc_tuple* target,
                        const char* options_json, char** report_json) {
    rhmc_status rc = guarded([&] {
        const TupleFile& sys_tf = need(system, "verify");
        const TupleFile& tgt_tf = need(target, "verify");
        require_role(tgt_tf, TupleRole::monodromy, "verify target");
        tgt_tf.tuple.validate();
        Options o = parse_options(options_json);
        TupleFile local = sys_tf;
        if (o.points) local.points = o.points;
        FuchsianSystem sys = system_from_file(local);
        if (sys.p() != tgt_tf.tuple.p() || sys.n() != tgt_tf.tuple.n())
            throw rhmc_error(status::precondition, "verify: system and target shapes differ");

        VerifyReport rep = verify_rh_solution(sys, tgt_tf.tuple, o.cfg);

        json out = {{"success", rep.success},
                    {"relation_defect", rep.relation_defect},
                    {"residual", std::isfinite(rep.residual) ? json(rep.residual) : json(nullptr)},
                    {"conjugator", rep.success ? matrix_json(rep.conjugator) : json(nullptr)}};
        set_out(report_json, out.dump(2) + "\n");
        if (!rep.success)
            throw rhmc_error(status::verification,
                             "verify: the system does not reproduce the target tuple");
    });
    return rc;
}

}  // extern "C"
