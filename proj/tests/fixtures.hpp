#pragma once

#include "oracles.hpp"
#include "qfz/pipeline.hpp"

namespace fixture {

// m = 6, (p, m - p) = (2, 4), N = 4
inline const qfz::FormPair& holomorphic_pair()
{
    static const qfz::FormPair pair = [] {
        qfz::PipelineParams p;
        return qfz::build_pair(qfz::make_form(oracle::diag({2, 2, -2, -2, -2, -2})), p);
    }();
    return pair;
}

// (m, p, l) = (5, 4, 3), N = 4
inline const qfz::FormPair& maass_pair()
{
    static const qfz::FormPair pair = [] {
        qfz::PipelineParams p;
        return qfz::build_pair(qfz::make_form(oracle::diag({2, 2, 2, 2, -2})), p);
    }();
    return pair;
}

inline qfz::FourierExpansion fresh_F(const qfz::FormPair& pair)
{
    if (pair.kind == qfz::FormKind::Holomorphic)
        return qfz::build_holomorphic(pair.profile, pair.measures.plus, pair.F.n_max());
    return qfz::build_maass(pair.profile, pair.ell, pair.measures.plus, pair.measures.minus, pair.F.n_max());
}

} // namespace fixture
