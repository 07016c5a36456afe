"""Solver toolkit for the Trigger Arc Traveling Salesman Problem."""

from .model import (Instance, InfeasibleTourError, TourEvaluation, delta_cost, evaluate_tour, gap,
                    load_instance, parse_instance, tour_cost)

__all__ = ["Instance", "InfeasibleTourError", "TourEvaluation", "delta_cost", "evaluate_tour", "gap",
           "load_instance", "parse_instance", "tour_cost"]
__version__ = "0.1.0"
