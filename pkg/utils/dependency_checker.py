"""
Dependency checker to verify required packages are installed
"""
import logging
import importlib.util
from typing import Optional

logger = logging.getLogger(__name__)


class DependencyChecker:
    """Check for required dependencies and provide helpful error messages"""

    # Optional features and the packages they need
    FEATURE_DEPENDENCIES = {
        'vtk': ['meshio'],
        'sentry': ['sentry_sdk'],
    }

    # Core dependencies required by the solver
    CORE_DEPENDENCIES = [
        'numpy',
        'scipy',
        'pydantic',
        'yaml',
        'dotenv',
    ]

    @staticmethod
    def check_package(package_name: str) -> bool:
        """
        Check if a package is installed

        Args:
            package_name: Name of the package to check

        Returns:
            bool: True if package is installed, False otherwise
        """
        spec = importlib.util.find_spec(package_name)
        return spec is not None

    @staticmethod
    def check_core_dependencies() -> dict:
        """
        Check all core dependencies

        Returns:
            dict: Dictionary with dependency status
        """
        results = {}
        missing_deps = []

        for dep in DependencyChecker.CORE_DEPENDENCIES:
            is_installed = DependencyChecker.check_package(dep)
            results[dep] = is_installed
            if not is_installed:
                missing_deps.append(dep)

        if missing_deps:
            logger.error(
                f"Missing core dependencies: {', '.join(missing_deps)}. "
                f"Please run: pip install -r requirements.txt"
            )

        return results

    @staticmethod
    def check_feature_dependencies() -> dict:
        """
        Check dependencies of optional features

        Returns:
            dict: Dictionary with per-feature package status
        """
        results = {}

        for feature, packages in DependencyChecker.FEATURE_DEPENDENCIES.items():
            feature_status = {}
            for package in packages:
                is_installed = DependencyChecker.check_package(package)
                feature_status[package] = is_installed
                if not is_installed:
                    logger.warning(
                        f"Feature '{feature}' dependency '{package}' is not installed. "
                        f"The feature will not be available until you run: pip install -r requirements.txt"
                    )
            results[feature] = feature_status

        return results

    @staticmethod
    def verify_all_dependencies() -> tuple[bool, list]:
        """
        Verify all dependencies and return status

        Returns:
            tuple: (all_core_installed, missing_features)
        """
        logger.info("Checking dependencies...")

        core_results = DependencyChecker.check_core_dependencies()
        all_core_installed = all(core_results.values())

        feature_results = DependencyChecker.check_feature_dependencies()
        missing_features = [
            feature for feature, packages in feature_results.items()
            if not all(packages.values())
        ]

        if all_core_installed:
            logger.info("All core dependencies are installed")
        else:
            logger.error("Some core dependencies are missing")

        if missing_features:
            logger.warning(
                f"Some features have missing dependencies: {', '.join(missing_features)}"
            )
        else:
            logger.info("All feature dependencies are installed")

        return all_core_installed, missing_features

    @staticmethod
    def get_installation_help_message(feature: Optional[str] = None) -> str:
        """
        Get a helpful message for installing dependencies

        Args:
            feature: Optional feature name for specific help

        Returns:
            str: Help message
        """
        if feature and feature in DependencyChecker.FEATURE_DEPENDENCIES:
            packages = DependencyChecker.FEATURE_DEPENDENCIES[feature]
            return (
                f"The '{feature}' feature requires the following packages: {', '.join(packages)}.\n"
                f"To install all dependencies, run: pip install -r requirements.txt"
            )
        return (
            "Some dependencies are missing. "
            "To install all required dependencies, run: pip install -r requirements.txt"
        )
