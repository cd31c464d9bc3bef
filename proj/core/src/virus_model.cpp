#include "mvnet/virus_model.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "mvnet/config.hpp"
#include "mvnet/error.hpp"

namespace mvnet {

int popcount(VirusSet s) noexcept { return std::popcount(s); }

VirusModel::VirusModel(std::vector<std::string> names, std::vector<double> mu, std::vector<double> p_default,
                       std::span<const std::pair<VirusId, VirusId>> competing_pairs,
                       std::span<const Override> overrides)
    : names_(std::move(names)), mu_(std::move(mu)), p_default_(std::move(p_default)) {
    const int m = static_cast<int>(mu_.size());
    if (m < 1) throw InvalidModel("model needs at least one virus");
    if (m > kMaxViruses) {
        throw InvalidModel("at most " + std::to_string(kMaxViruses) + " viruses supported, got " + std::to_string(m));
    }
    if (static_cast<int>(p_default_.size()) != m) throw InvalidModel("need one default p per virus");
    if (names_.empty()) {
        for (int v = 0; v < m; ++v) names_.push_back("v" + std::to_string(v + 1));
    }
    if (static_cast<int>(names_.size()) != m) throw InvalidModel("need one name per virus");
    for (int v = 0; v < m; ++v) {
        if (!(mu_[static_cast<std::size_t>(v)] > 0.0)) throw InvalidModel("mu must be positive for " + names_[static_cast<std::size_t>(v)]);
        const double p = p_default_[static_cast<std::size_t>(v)];
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidProbability("p out of [0,1] for " + names_[static_cast<std::size_t>(v)]);
    }
    compete_.assign(static_cast<std::size_t>(m), 0);
    for (const auto& [a, b] : competing_pairs) {
        if (a < 0 || a >= m || b < 0 || b >= m) throw InvalidModel("competition pair references unknown virus");
        if (a == b) throw InvalidModel("a virus cannot compete with itself");
        compete_[static_cast<std::size_t>(a)] |= single(b);
        compete_[static_cast<std::size_t>(b)] |= single(a);
    }
    finalize();
    for (const auto& o : overrides) {
        if (o.virus < 0 || o.virus >= m) throw InvalidModel("override references unknown virus");
        if (contains(o.set, o.virus)) throw InvalidModel("override p^{S,v} requires v not in S");
        if (o.set != kClean && !is_realizable(o.set)) throw InvalidModel("override on unrealizable set " + set_name(o.set));
        if (!(o.p >= 0.0 && o.p <= 1.0)) throw InvalidProbability("override p out of [0,1]");
        p_table_[{o.set, o.virus}] = o.p;
    }
    finalize();
}

VirusModel VirusModel::coexisting(std::span<const double> rates) {
    return VirusModel({}, std::vector<double>(rates.begin(), rates.end()), std::vector<double>(rates.size(), 1.0), {});
}

VirusModel VirusModel::competing(std::span<const double> rates) {
    std::vector<std::pair<VirusId, VirusId>> pairs;
    const int m = static_cast<int>(rates.size());
    for (int a = 0; a < m; ++a)
        for (int b = a + 1; b < m; ++b) pairs.emplace_back(a, b);
    return VirusModel({}, std::vector<double>(rates.begin(), rates.end()), std::vector<double>(rates.size(), 1.0), pairs);
}

void VirusModel::finalize() {
    const int m = size();
    const VirusSet full = all();
    realizable_.clear();
    index_.assign(std::size_t{1} << m, -1);
    for (VirusSet s = 1; s <= full; ++s) {
        if (is_realizable(s)) {
            index_[s] = static_cast<int>(realizable_.size());
            realizable_.push_back(s);
        }
    }

    lambda_max_ = 0.0;
    lambda_min_ = std::numeric_limits<double>::infinity();
    p_max_ = 0.0;
    p_min_ = std::numeric_limits<double>::infinity();
    lambda_max_v_.assign(static_cast<std::size_t>(m), 0.0);
    p_max_v_.assign(static_cast<std::size_t>(m), 0.0);
    p_min_v_.assign(static_cast<std::size_t>(m), std::numeric_limits<double>::infinity());
    auto visit = [&](VirusSet s) {
        for (VirusId v = 0; v < m; ++v) {
            if (contains(s, v)) continue;
            const double pv = p(s, v);
            const double lv = pv * mu(v);
            lambda_max_ = std::max(lambda_max_, lv);
            lambda_min_ = std::min(lambda_min_, lv);
            p_max_ = std::max(p_max_, pv);
            p_min_ = std::min(p_min_, pv);
            auto vi = static_cast<std::size_t>(v);
            lambda_max_v_[vi] = std::max(lambda_max_v_[vi], lv);
            p_max_v_[vi] = std::max(p_max_v_[vi], pv);
            p_min_v_[vi] = std::min(p_min_v_[vi], pv);
        }
    };
    visit(kClean);
    for (VirusSet s : realizable_) visit(s);
}

VirusId VirusModel::find(const std::string& name) const {
    const auto it = std::find(names_.begin(), names_.end(), name);
    return it == names_.end() ? -1 : static_cast<VirusId>(it - names_.begin());
}

double VirusModel::p(VirusSet s, VirusId v) const {
    if (const auto it = p_table_.find({s, v}); it != p_table_.end()) return it->second;
    return p_default(v);
}

bool VirusModel::is_realizable(VirusSet s) const noexcept {
    if (s == kClean || (s & ~all()) != 0) return false;
    for (VirusId v = 0; v < size(); ++v) {
        if (contains(s, v) && (s & compete_[static_cast<std::size_t>(v)]) != 0) return false;
    }
    return true;
}

int VirusModel::set_index(VirusSet s) const noexcept {
    if (s >= index_.size()) return -1;
    return index_[s];
}

VirusSet VirusModel::infect_target(VirusSet s, VirusId v) const {
    if (contains(s, v)) throw AlreadyInfected(set_name(s) + " already contains " + name(v));
    return (s & ~competitors(v)) | single(v);
}

std::vector<Predecessor> VirusModel::predecessors(VirusSet s) const {
    std::vector<Predecessor> out;
    for (VirusId v = 0; v < size(); ++v) {
        if (!contains(s, v)) continue;
        const VirusSet base = s & ~single(v);
        const VirusSet cv = competitors(v);
        // Ascending enumeration of R ⊆ C_v, starting from R = ∅.
        VirusSet r = 0;
        while (true) {
            const VirusSet t = base | r;
            if (t == kClean || is_realizable(t)) out.push_back({t, v});
            if (r == cv) break;
            r = (r - cv) & cv;
        }
    }
    return out;
}

double VirusModel::mu_min() const noexcept { return *std::min_element(mu_.begin(), mu_.end()); }

double VirusModel::lambda_hat() const noexcept {
    double sum = 0.0;
    for (VirusId v = 0; v < size(); ++v) sum += lambda(kClean, v);
    return sum;
}

std::string VirusModel::set_name(VirusSet s) const {
    std::string out = "{";
    bool first = true;
    for (VirusId v = 0; v < size(); ++v) {
        if (!contains(s, v)) continue;
        if (!first) out += ',';
        out += name(v);
        first = false;
    }
    return out + "}";
}

VirusSet VirusModel::parse_set(const std::string& text) const {
    std::string_view t = trim(text);
    if (t.size() < 2 || t.front() != '{' || t.back() != '}') throw InvalidModel("set must look like {a,b}: " + text);
    t = t.substr(1, t.size() - 2);
    VirusSet s = 0;
    while (!t.empty()) {
        const auto comma = t.find(',');
        const std::string tok(trim(t.substr(0, comma)));
        if (!tok.empty()) {
            const VirusId v = find(tok);
            if (v < 0) throw InvalidModel("unknown virus '" + tok + "'");
            s |= single(v);
        }
        if (comma == std::string_view::npos) break;
        t = t.substr(comma + 1);
    }
    return s;
}

std::string VirusModel::serialize() const {
    std::ostringstream out;
    out << "viruses =";
    for (const auto& n : names_) out << ' ' << n;
    out << "\nmu =";
    for (double x : mu_) out << ' ' << format_double(x);
    out << "\np =";
    for (double x : p_default_) out << ' ' << format_double(x);
    out << "\ncompete =";
    bool any = false;
    for (VirusId a = 0; a < size(); ++a) {
        for (VirusId b = a + 1; b < size(); ++b) {
            if (competes(a, b)) {
                out << ' ' << name(a) << ':' << name(b);
                any = true;
            }
        }
    }
    if (!any) out << " none";
    out << '\n';
    for (const auto& [key, p] : p_table_) {
        out << "p_set = " << set_name(key.first) << ' ' << name(key.second) << ' ' << format_double(p) << '\n';
    }
    return out.str();
}

VirusModel VirusModel::parse(const std::string& text) {
    std::vector<std::string> names;
    std::vector<double> mu, p;
    std::vector<ConfigEntry> compete_entries, p_entries;
    bool have_names = false, have_mu = false, have_p = false;
    for (const auto& e : parse_config(text)) {
        if (e.key == "viruses") {
            names = split_ws(e.value);
            have_names = true;
        } else if (e.key == "mu") {
            mu = parse_doubles(e);
            have_mu = true;
        } else if (e.key == "p") {
            p = parse_doubles(e);
            have_p = true;
        } else if (e.key == "compete") {
            compete_entries.push_back(e);
        } else if (e.key == "p_set") {
            p_entries.push_back(e);
        } else {
            throw ConfigError(e.line, e.key, "unknown model key");
        }
    }
    if (!have_mu) throw ConfigError(0, "mu", "missing");
    if (!have_names) {
        for (std::size_t v = 0; v < mu.size(); ++v) names.push_back("v" + std::to_string(v + 1));
    }
    if (!have_p) p.assign(mu.size(), 1.0);
    if (names.size() != mu.size()) throw ConfigError(0, "viruses", "count does not match mu");
    if (p.size() == 1 && mu.size() > 1) p.assign(mu.size(), p.front());

    auto lookup = [&](const ConfigEntry& e, const std::string& n) {
        const auto it = std::find(names.begin(), names.end(), n);
        if (it == names.end()) throw ConfigError(e.line, e.key, "unknown virus '" + n + "'");
        return static_cast<VirusId>(it - names.begin());
    };

    std::vector<std::pair<VirusId, VirusId>> pairs;
    for (const auto& e : compete_entries) {
        for (const auto& tok : split_ws(e.value)) {
            if (tok == "none") continue;
            if (tok == "all") {
                for (VirusId a = 0; a < static_cast<VirusId>(names.size()); ++a)
                    for (VirusId b = a + 1; b < static_cast<VirusId>(names.size()); ++b) pairs.emplace_back(a, b);
                continue;
            }
            const auto colon = tok.find(':');
            if (colon == std::string::npos) throw ConfigError(e.line, e.key, "expected a:b, got '" + tok + "'");
            pairs.emplace_back(lookup(e, tok.substr(0, colon)), lookup(e, tok.substr(colon + 1)));
        }
    }

    try {
        VirusModel base(names, mu, p, pairs);
        std::vector<Override> overrides;
        for (const auto& e : p_entries) {
            const auto close = e.value.find('}');
            if (close == std::string::npos) throw ConfigError(e.line, e.key, "expected {set} virus prob");
            const auto rest = split_ws(std::string_view(e.value).substr(close + 1));
            if (rest.size() != 2) throw ConfigError(e.line, e.key, "expected {set} virus prob");
            overrides.push_back({base.parse_set(e.value.substr(0, close + 1)), lookup(e, rest[0]), parse_double(e, rest[1])});
        }
        return VirusModel(names, mu, p, pairs, overrides);
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& err) {
        throw ConfigError(0, "model", err.what());
    }
}

VirusModel VirusModel::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(0, path, "cannot open model file");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str());
}

}  // namespace mvnet
