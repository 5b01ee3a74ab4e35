#include "barriernet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#include "barriernet/errors.hpp"

namespace barriernet {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over seed ^ golden-ratio-scaled stream index.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

double round_px(double x) { return std::round(x * 10000.0) / 10000.0; }

}  // namespace

OhlcvSeries generate_series(std::string ticker, int days, std::uint64_t seed,
                            const SynthConfig& cfg) {
    if (days < 1) throw ValidationError("generate_series: days must be >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    const double dt = 1.0 / 252.0;
    const double sigma_d = cfg.volatility * std::sqrt(dt);
    const double mu_d = (cfg.drift - 0.5 * cfg.volatility * cfg.volatility) * dt;

    double start = cfg.start_price_min +
                   uniform(rng) * (cfg.start_price_max - cfg.start_price_min);
    double log_volume_sigma = 0.8;

    OhlcvSeries series;
    series.ticker = std::move(ticker);
    series.bars.reserve(std::size_t(days));

    Date date = cfg.start_date.is_weekend() ? cfg.start_date.next_weekday() : cfg.start_date;
    double prev_close = start;
    for (int i = 0; i < days; ++i) {
        double open = prev_close * std::exp(cfg.gap_volatility * normal(rng));
        double close = prev_close * std::exp(mu_d + sigma_d * normal(rng));
        double hi_wick = std::abs(normal(rng)) * sigma_d * cfg.wick_scale;
        double lo_wick = std::abs(normal(rng)) * sigma_d * cfg.wick_scale;

        Bar bar;
        bar.date = date;
        bar.open = round_px(open);
        bar.close = round_px(close);
        bar.high = round_px(std::max(open, close) * std::exp(hi_wick));
        bar.low = round_px(std::min(open, close) * std::exp(-lo_wick));
        // Rounding can nudge the extremes past the body; clamp back.
        bar.high = std::max({bar.high, bar.open, bar.close});
        bar.low = std::max(std::min({bar.low, bar.open, bar.close}), 0.0001);
        bar.volume = std::int64_t(std::llround(cfg.mean_volume * std::exp(log_volume_sigma * normal(rng))));
        if (bar.volume < 0) bar.volume = 0;
        series.bars.push_back(bar);

        prev_close = close;
        date = date.next_weekday();
    }
    return series;
}

std::vector<OhlcvSeries> generate_universe(const SynthConfig& cfg) {
    if (cfg.tickers < 1) throw ValidationError("generate_universe: tickers must be >= 1");
    std::vector<OhlcvSeries> out;
    out.reserve(std::size_t(cfg.tickers));
    for (int i = 0; i < cfg.tickers; ++i) {
        char name[16];
        std::snprintf(name, sizeof name, "SYN%03d", i);
        out.push_back(generate_series(name, cfg.days, mix_seed(cfg.seed, std::uint64_t(i)), cfg));
    }
    return out;
}

}  // namespace barriernet
