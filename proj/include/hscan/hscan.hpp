#pragma once

#include "hscan/error.hpp"
#include "hscan/skeleton.hpp"
#include "hscan/transform.hpp"
#include "hscan/pose.hpp"
#include "hscan/exec.hpp"
#include "hscan/scan.hpp"
#include "hscan/io.hpp"
#include "hscan/corpus.hpp"
#include "hscan/bench.hpp"
