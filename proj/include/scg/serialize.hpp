#ifndef SCG_SERIALIZE_HPP
#define SCG_SERIALIZE_HPP

// JSON round-tripping of the surface data. Complex numbers are stored as
// two-element arrays [re, im]; the shortest-round-trip printing of the
// JSON library makes serialization lossless for doubles.

#include <complex>
#include <string>

#include <json.hpp>

#include <scg/errors.hpp>
#include <scg/wdata.hpp>

namespace scg
{

using json = nlohmann::ordered_json;

inline json to_json(cplx z)
{
    return json::array({z.real(), z.imag()});
}

inline cplx complex_from_json(const json &j)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw error(errc::io_error, "expected a two-element [re, im] array");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json serialize(const w_data &d)
{
    json j;
    if (const auto *c1 = std::get_if<case1_params>(&d)) {
        j["case"] = 1;
        j["b"] = to_json(c1->b);
        j["c"] = to_json(c1->c);
        j["l"] = to_json(c1->l);
        j["m"] = to_json(c1->m);
        j["y0"] = to_json(c1->y0);
        j["lambda"] = to_json(c1->lambda);
    } else if (const auto *c2 = std::get_if<case2_params>(&d)) {
        j["case"] = 2;
        j["a"] = to_json(c2->a);
        j["b"] = to_json(c2->b);
        j["c"] = to_json(c2->c);
        j["x0"] = to_json(c2->x0);
        j["lambda"] = to_json(c2->lambda);
    } else {
        const auto &dr = std::get<deformed_r3>(d);
        j["case"] = 3;
        j["rho"] = dr.rho;
        j["lambda"] = to_json(dr.lambda);
        j["zeta"] = to_json(dr.zeta);
    }
    return j;
}

inline w_data deserialize(const json &j)
{
    if (!j.is_object() || !j.contains("case") || !j["case"].is_number_integer()) {
        throw error(errc::io_error, "datum must be an object with an integral 'case' field");
    }
    const int c = j["case"].get<int>();
    auto field = [&](const char *name) -> cplx {
        if (!j.contains(name)) {
            throw error(errc::io_error, std::string("missing field '") + name + "'");
        }
        return complex_from_json(j[name]);
    };
    switch (c) {
    case 1: {
        case1_params p;
        p.b = field("b");
        p.c = field("c");
        p.l = field("l");
        p.m = field("m");
        p.y0 = field("y0");
        p.lambda = field("lambda");
        return p;
    }
    case 2: {
        case2_params p;
        p.a = field("a");
        p.b = field("b");
        p.c = field("c");
        p.x0 = field("x0");
        p.lambda = field("lambda");
        return p;
    }
    case 3: {
        deformed_r3 p;
        if (!j.contains("rho") || !j["rho"].is_number()) {
            throw error(errc::io_error, "missing numeric field 'rho'");
        }
        p.rho = j["rho"].get<double>();
        p.lambda = field("lambda");
        p.zeta = field("zeta");
        return p;
    }
    default:
        throw error(errc::io_error, "unknown 'case' value");
    }
}

} // namespace scg

#endif
