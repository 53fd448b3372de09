#ifndef TABUCLUST_TABUCLUST_HPP
#define TABUCLUST_TABUCLUST_HPP

#include "dataset.hpp"
#include "objective.hpp"
#include "lloyd.hpp"
#include "qmts.hpp"
#include "registry.hpp"
#include "bench.hpp"

#endif
