"""Command modules for the Universal Cover CLI"""
