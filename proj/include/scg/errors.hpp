#ifndef SCG_ERRORS_HPP
#define SCG_ERRORS_HPP

#include <complex>
#include <stdexcept>
#include <string>

namespace scg
{

/// Failure categories raised by the numerical kernels. The CLI maps usage
/// mistakes to exit code 1 -- including DomainError, which means an argument
/// reached a kernel out of range -- and the rest to exit code 2.
enum class errc
{
    non_convergence,
    interior_singularity,
    domain_error,
    branch_cut,
    branch_ambiguity,
    non_integrable,
    division_by_zero,
    at_pole,
    at_end,
    branch_lost,
    imaginary_zeta,
    rank_deficient,
    path_through_pole,
    search_inconclusive,
    degree_ambiguous,
    left_region,
    io_error
};

inline const char *errc_name(errc c)
{
    switch (c) {
        case errc::non_convergence:
            return "NonConvergence";
        case errc::interior_singularity:
            return "InteriorSingularity";
        case errc::domain_error:
            return "DomainError";
        case errc::branch_cut:
            return "BranchCut";
        case errc::branch_ambiguity:
            return "BranchAmbiguity";
        case errc::non_integrable:
            return "NonIntegrable";
        case errc::division_by_zero:
            return "DivisionByZero";
        case errc::at_pole:
            return "AtPole";
        case errc::at_end:
            return "AtEnd";
        case errc::branch_lost:
            return "BranchLost";
        case errc::imaginary_zeta:
            return "ImaginaryZeta";
        case errc::rank_deficient:
            return "RankDeficient";
        case errc::path_through_pole:
            return "PathThroughPole";
        case errc::search_inconclusive:
            return "SearchInconclusive";
        case errc::degree_ambiguous:
            return "DegreeAmbiguous";
        case errc::left_region:
            return "LeftRegion";
        case errc::io_error:
            return "IOError";
    }
    return "Unknown";
}

class error : public std::runtime_error
{
public:
    error(errc c, const std::string &what) : std::runtime_error(std::string(errc_name(c)) + ": " + what), m_code(c) {}
    errc code() const
    {
        return m_code;
    }

private:
    errc m_code;
};

/// NonConvergence keeps the last two estimates so callers can judge how far
/// the iteration was from settling.
class non_convergence_error : public error
{
public:
    non_convergence_error(const std::string &what, std::complex<double> last, std::complex<double> previous)
        : error(errc::non_convergence, what), m_last(last), m_previous(previous)
    {
    }
    std::complex<double> last() const
    {
        return m_last;
    }
    std::complex<double> previous() const
    {
        return m_previous;
    }

private:
    std::complex<double> m_last, m_previous;
};

} // namespace scg

#endif
