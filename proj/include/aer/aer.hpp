#pragma once

#include <aer/bench.hpp>
#include <aer/commands.hpp>
#include <aer/config.hpp>
#include <aer/detector.hpp>
#include <aer/error.hpp>
#include <aer/io.hpp>
#include <aer/model.hpp>
#include <aer/pipeline.hpp>
#include <aer/scoring.hpp>
#include <aer/signal.hpp>
