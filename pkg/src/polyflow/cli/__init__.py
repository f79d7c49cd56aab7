"""Command-line harness: instance files, generators and benchmarks."""
