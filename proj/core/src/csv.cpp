#include "mvnet/csv.hpp"

#include "mvnet/config.hpp"

namespace mvnet {

std::string csv_header(const VirusModel& model) {
    std::string h = "t,mean_frac_any,se_any";
    for (VirusId v = 0; v < model.size(); ++v) h += ",mean_frac_" + model.name(v);
    h += ",mean_beta,mean_q\n";
    return h;
}

std::string trajectory_csv(const HostTrajectory& tr, const VirusModel& model) {
    std::string out = csv_header(model);
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        out += format_double(tr.t[k]);
        out += ',' + format_double(tr.mean_any(k)) + ",0";
        for (VirusId v = 0; v < model.size(); ++v) {
            out += ',';
            if (!tr.virus.empty()) out += format_double(tr.mean_virus(k, v));
        }
        out += ',' + format_double(tr.beta.empty() ? 0.0 : tr.mean_beta(k));
        out += ',' + format_double(tr.q.empty() ? 0.0 : tr.q[k]);
        out += '\n';
    }
    return out;
}

std::string monte_carlo_csv(const MonteCarloResult& mc, const VirusModel& model) {
    std::string out = csv_header(model);
    for (std::size_t k = 0; k < mc.t.size(); ++k) {
        out += format_double(mc.t[k]);
        out += ',' + format_double(mc.mean_any[k]) + ',' + format_double(mc.se_any[k]);
        for (VirusId v = 0; v < model.size(); ++v) out += ',' + format_double(mc.mean_virus[k][static_cast<std::size_t>(v)]);
        out += ',' + format_double(mc.mean_beta[k]) + ',' + format_double(mc.mean_q[k]);
        out += '\n';
    }
    return out;
}

}  // namespace mvnet
