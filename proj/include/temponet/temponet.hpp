#ifndef TEMPONET_TEMPONET_HPP
#define TEMPONET_TEMPONET_HPP

#include "temponet/baselines.hpp"
#include "temponet/clustering.hpp"
#include "temponet/cp_decomp.hpp"
#include "temponet/error.hpp"
#include "temponet/eval.hpp"
#include "temponet/io.hpp"
#include "temponet/kmeans.hpp"
#include "temponet/lifetime.hpp"
#include "temponet/pipeline.hpp"
#include "temponet/random.hpp"
#include "temponet/runner.hpp"
#include "temponet/synthgen.hpp"
#include "temponet/tensor.hpp"

#endif // TEMPONET_TEMPONET_HPP
