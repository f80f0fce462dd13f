#include "lawq/methods.hpp"

#include <string>

#include "lawq/error.hpp"

namespace lawq {

bool MethodSpec::loss_aware() const noexcept {
    switch (method) {
        case Method::Lab:
        case Method::LatExact:
        case Method::LatApprox:
        case Method::Lat2Exact:
        case Method::Lat2Approx:
        case Method::Laq:
            return true;
        default:
            return false;
    }
}

bool MethodSpec::clips_weights() const noexcept {
    switch (method) {
        case Method::FullPrecision:
        case Method::Dorefa:
            return false;
        case Method::Laq:
            return bits == 2;
        default:
            return true;
    }
}

bool MethodSpec::uses_codes() const noexcept {
    return method != Method::FullPrecision && method != Method::Dorefa;
}

std::string MethodSpec::label() const {
    if (method == Method::Laq) return "LAQ" + std::to_string(bits) + "(" + std::string(to_string(scheme)) + ")";
    if (method == Method::Dorefa) return "dorefa" + std::to_string(bits);
    return std::string(to_string(method));
}

std::string_view to_string(Method method) noexcept {
    switch (method) {
        case Method::FullPrecision: return "full_precision";
        case Method::Sign: return "sign";
        case Method::Bwn: return "bwn";
        case Method::Lab: return "lab";
        case Method::Twn: return "twn";
        case Method::LatExact: return "lat-exact";
        case Method::LatApprox: return "lat-approx";
        case Method::Lat2Exact: return "lat2-exact";
        case Method::Lat2Approx: return "lat2-approx";
        case Method::Laq: return "laq";
        case Method::Dorefa: return "dorefa";
    }
    return "?";
}

MethodSpec parse_method(std::string_view text) {
    static constexpr Method all[] = {Method::FullPrecision, Method::Sign,      Method::Bwn,        Method::Lab,
                                     Method::Twn,           Method::LatExact,  Method::LatApprox,  Method::Lat2Exact,
                                     Method::Lat2Approx,    Method::Laq,       Method::Dorefa};
    for (Method m : all) {
        if (text == to_string(m)) return MethodSpec{m};
    }
    if (text == "LATe") return {Method::LatExact};
    if (text == "LATa") return {Method::LatApprox};
    if (text == "LAT2e") return {Method::Lat2Exact};
    if (text == "LAT2a") return {Method::Lat2Approx};
    // LAQ<m>(scheme)
    if (text.starts_with("LAQ") && text.ends_with(")")) {
        const auto open = text.find('(');
        if (open != std::string_view::npos && open > 3) {
            const std::string digits(text.substr(3, open - 3));
            const std::string_view scheme = text.substr(open + 1, text.size() - open - 2);
            if (digits.find_first_not_of("0123456789") == std::string::npos && digits.size() <= 2) {
                MethodSpec spec{Method::Laq};
                spec.bits = std::stoi(digits);
                spec.scheme = parse_scheme(scheme);
                return spec;
            }
        }
    }
    fail(ErrorCode::BadValue, "unknown method id '" + std::string(text) + "'");
}

LayerQuantization quantize_with(const MethodSpec& spec, std::span<const double> w, std::span<const double> d,
                                std::span<const Code> prev_codes, const AlternationOptions& opts) {
    LayerQuantization out;
    if (spec.loss_aware() && d.size() != w.size()) {
        fail(ErrorCode::LengthMismatch, std::string(to_string(spec.method)) + " needs one curvature entry per weight");
    }
    auto closed_form = [&](QuantizedLayer layer) {
        out.info.iterations = 1;
        out.layer = std::move(layer);
    };
    switch (spec.method) {
        case Method::FullPrecision:
            out.w_hat.assign(w.begin(), w.end());
            return out;
        case Method::Dorefa:
            out.w_hat = quantize_dorefa(w, spec.bits);
            out.info.iterations = 1;
            return out;
        case Method::Sign: closed_form(binarize_sign(w)); break;
        case Method::Bwn: closed_form(binarize_bwn(w)); break;
        case Method::Lab: closed_form(binarize_lab(w, d)); break;
        case Method::Twn: closed_form(ternarize_twn(w)); break;
        case Method::LatExact: {
            ExactResult r = ternarize_exact(w, d);
            out.info.iterations = 1;
            out.info.objective_trace.push_back(r.trace.objective);
            out.layer = std::move(r.layer);
            break;
        }
        case Method::LatApprox: {
            QuantResult r = ternarize_approx(w, d, prev_codes, opts);
            out.layer = std::move(r.layer);
            out.info = std::move(r.info);
            break;
        }
        case Method::Lat2Exact: {
            QuantResult r = ternarize_two_scale_exact(w, d);
            out.layer = std::move(r.layer);
            out.info = std::move(r.info);
            break;
        }
        case Method::Lat2Approx: {
            QuantResult r = ternarize_two_scale_approx(w, d, prev_codes, opts);
            out.layer = std::move(r.layer);
            out.info = std::move(r.info);
            break;
        }
        case Method::Laq: {
            QuantResult r = quantize_mbit(w, d, QuantSet::build(spec.bits, spec.scheme), prev_codes, opts);
            out.layer = std::move(r.layer);
            out.info = std::move(r.info);
            break;
        }
    }
    out.w_hat = out.layer->reconstruct();
    return out;
}

}  // namespace lawq
